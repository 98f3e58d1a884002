#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amab/batch.hpp"
#include "amab/config.hpp"
#include "amab/inference.hpp"
#include "amab/mutual_information.hpp"
#include "amab/stats.hpp"

namespace amab {

// Settings of the belief assistant used by the figure experiments.
nlohmann::json belief_robot_params(int particles);

// --- propositions ------------------------------------------------------------

struct Prop1Result {
  long episodes = 0;
  double regret_250 = 0.0;
  double regret_500 = 0.0;
  double se_500 = 0.0;
  double bound = 0.0;
};
// most_frequent robot with an epsilon-optimal(0.1) human on theta = (0.8, 0.5, 0.5, 0.5).
Prop1Result run_prop1(long episodes, std::uint64_t seed, int threads = 1);

// sum over suboptimal i of gap_i / (sqrt(f_best) - sqrt(f_i))^2.
double finite_regret_bound(std::span<const double> frequencies, std::span<const double> theta);

struct Prop2Result {
  long episodes = 0;
  double per_round_500 = 0.0;
  double per_round_1000 = 0.0;
  double per_round_2000 = 0.0;
};
// glie robot (square schedule) with an epsilon-greedy(0.1) human, horizon
// 2000, on a fixed instance (default (0.8, 0.5, 0.5, 0.5)); an empty theta
// samples instances from the uniform prior.
Prop2Result run_prop2(long episodes, std::uint64_t seed, int threads = 1,
                      std::vector<double> theta = {0.8, 0.5, 0.5, 0.5});

struct Prop4Result {
  long episodes = 0;
  long belief_episodes = 0;
  double most_frequent_early = 0.0;  // mean per-round regret, rounds 1..250
  double most_frequent_late = 0.0;   // rounds 751..1000
  double belief_early = 0.0;
  double belief_late = 0.0;
};
// Greedy human on the one-and-a-half-arm bandit, horizon 1000.
Prop4Result run_prop4(long episodes, long belief_episodes, int particles, std::uint64_t seed, int threads = 1);

struct Prop5Exactness {
  long seeds = 0;
  long mismatched_seeds = 0;
  int max_mismatch = 0;  // largest per-seed count of differing executed arms
};
// WSLS human + wsls_decoder(gittins 0.9) against solo gittins 0.9 with the
// solo learner drawing from the robot stream.
Prop5Exactness run_prop5_exactness(long seeds, std::uint64_t seed);

struct Prop5Magnitude {
  long episodes = 0;
  MeanSe assisted;
  MeanSe solo;
  MeanSe difference;  // assisted - solo, paired by episode
};
Prop5Magnitude run_prop5_magnitude(long episodes, std::uint64_t seed, int threads = 1);

// --- mutual information --------------------------------------------------------

struct MiBestArm {
  MIEstimate mi;
  double p_error = 0.0;  // P(executed arm at t != best arm)
  double p_error_se = 0.0;
};
// MI between the best arm and the human's first t suggestions (an absent
// suggestion is its own symbol), from n_traj episodes of `config`.
MiBestArm estimate_mi_best_arm(const ExperimentConfig& config, int prefix_t, long n_traj);

// Epsilon-greedy epsilon in {0, 0.02, 0.05, 0.1} and Thompson n in
// {1, 2, 3, 10, 30, inf}.
std::vector<PolicySpec> fig4_variants();

struct FanoRow {
  PolicySpec human;
  PolicySpec robot;
  MiBestArm estimate;
  double lower_bound = 0.0;  // (1 - p_error) log2 N - 1
  bool holds = false;        // mi >= lower_bound - 3 se
};
std::vector<FanoRow> run_fano_check(long n_traj, std::uint64_t seed, int threads = 1);

struct Fig4Row {
  PolicySpec human;
  MIEstimate mi;
  MeanSe assisted_regret;
};
// MI of the human's first 5 suggestions under belief assistance (teleoperation),
// alongside the regret of the same combined system.
std::vector<Fig4Row> run_fig4(long mi_trajectories, long regret_episodes, int particles, std::uint64_t seed,
                              int threads = 1);

// --- inverse bandit -------------------------------------------------

struct Table1Row {
  PolicySpec actual;
  PolicySpec assumed;
  MeanSe log_density;
  std::vector<double> values;  // per instance; NaN where inference failed
};

struct Table1Options {
  long instances = 200;
  int horizon = 5;
  std::uint64_t seed = 0;
  int threads = 1;
  MhConfig mh;
};

std::vector<PolicySpec> table1_learners();
// Two rows per learner: the correct model, then epsilon-optimal(0.1).
std::vector<Table1Row> run_table1(const Table1Options& options);

// --- regret comparisons --------------------------------------------------------

struct AssistanceComparison {
  RegretSummary assisted;
  RegretSummary solo;
  MeanSe improvement;  // solo - assisted, paired by episode
};
AssistanceComparison compare_to_solo(const ExperimentConfig& assisted);

// --- reproduce -----------------------------------------------------------------

struct ReproduceOptions {
  std::uint64_t seed = 20190311;
  int threads = 1;
  // Multiplies every default episode / instance count (minimum 1 each).
  double scale = 1.0;
  std::string out_dir = "out";
};

const std::vector<std::string>& reproduce_ids();
// Writes the CSV bundle for `id` into options.out_dir and returns the paths.
// Throws ConfigError for an unknown id.
std::vector<std::string> reproduce(const std::string& id, const ReproduceOptions& options);

}  // namespace amab
