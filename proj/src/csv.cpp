#include "amab/csv.hpp"

#include <cstdio>

namespace amab {

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << '\n';
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(long v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

std::vector<std::string> trajectory_header(int n_arms) {
  std::vector<std::string> h = {"episode", "t", "human_arm", "executed_arm", "reward"};
  for (int k = 0; k < n_arms; ++k) h.push_back("theta_" + std::to_string(k));
  return h;
}

void write_trajectory_rows(CsvWriter& w, long episode, const Trajectory& traj) {
  for (const auto& s : traj.steps) {
    std::vector<std::string> row = {fmt(episode), fmt(s.t), fmt(s.human_arm ? *s.human_arm : -1),
                                    fmt(s.executed_arm), fmt(s.reward)};
    for (double th : traj.instance.theta()) row.push_back(fmt(th));
    w.row(row);
  }
}

}  // namespace amab
