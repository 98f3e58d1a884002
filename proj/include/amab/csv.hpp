#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "amab/bandit.hpp"

namespace amab {

// RFC 4180 writer: CRLF-free (LF line ends), fields quoted only when they
// contain a comma, quote, CR or LF.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);
  void row(std::initializer_list<std::string> fields) { row(std::vector<std::string>(fields)); }

 private:
  std::ostream& out_;
};

std::string csv_escape(std::string_view field);
// Shortest round-trip-stable formatting (%.10g); integral values print
// without a decimal point.
std::string fmt(double v);
std::string fmt(long v);
std::string fmt(int v);

// trajectories.csv header for n arms.
std::vector<std::string> trajectory_header(int n_arms);
void write_trajectory_rows(CsvWriter& w, long episode, const Trajectory& traj);

inline const std::vector<std::string> kRegretHeader = {"human_policy", "robot_policy", "mode", "n_episodes",
                                                       "mean_regret", "se"};
inline const std::vector<std::string> kRegretCurveHeader = {"human_policy", "robot_policy", "t", "mean_cum_regret"};
inline const std::vector<std::string> kTable1Header = {"actual_policy", "assumed_policy", "mean_logdensity", "se",
                                                       "n"};
inline const std::vector<std::string> kMiHeader = {"policy", "variant", "prefix_t", "mi_bits", "mi_se",
                                                   "assisted_regret", "regret_se"};
inline const std::vector<std::string> kGridHeader = {"actual_policy", "assumed_policy", "mode", "reward_delta", "se"};

}  // namespace amab
