#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "amab/bandit.hpp"
#include "amab/config.hpp"
#include "amab/random.hpp"

namespace amab {

// Streams for one episode. They depend only on (master seed, episode index),
// not on the policies, so runs that differ only in policy see the same
// instances and reward draws.
struct EpisodeSeeds {
  std::uint64_t instance_key = 0;
  RandomStream instance;
  RandomStream environment;
  RandomStream human;
  RandomStream robot;
  RandomStream particles;
};
EpisodeSeeds episode_seeds(std::uint64_t master_seed, std::uint64_t episode);

BanditInstance episode_instance(const ExperimentConfig& config, EpisodeSeeds& seeds);

enum class StreamCoupling {
  kDefault,
  // The human draws from the episode's robot stream. Lets a solo learner
  // replay the exact draws a decoding robot makes with the same policy.
  kHumanOnRobotStream,
};

Trajectory run_episode(const ExperimentConfig& config, std::uint64_t episode,
                       StreamCoupling coupling = StreamCoupling::kDefault);

struct FailedEpisode {
  std::uint64_t episode = 0;
  std::uint64_t seed = 0;
  std::string error;
};

struct RegretSummary {
  std::string human_policy;
  std::string robot_policy;
  std::string mode;
  long n_episodes = 0;  // successful episodes only
  double mean_regret = 0.0;
  double se = 0.0;
  std::vector<double> mean_cum_regret;  // index t-1
  std::vector<FailedEpisode> failures;
};

struct BatchOptions {
  bool keep_trajectories = false;
  int threads = 0;  // 0: use config.threads
  StreamCoupling coupling = StreamCoupling::kDefault;
};

struct BatchResult {
  RegretSummary summary;
  std::vector<double> regrets;  // per episode; NaN for failed episodes
  std::vector<Trajectory> trajectories;
};

// Episodes run in fixed-size chunks; per-chunk sums are merged in chunk
// order so results do not depend on the thread count.
BatchResult run_batch(const ExperimentConfig& config, const BatchOptions& options = {});

// Runs fn(i) for i in [0, n) on `threads` workers pulling from a shared
// counter. fn must only write to per-index state.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

struct GridCell {
  PolicySpec actual;
  PolicySpec assumed;
  InteractionMode mode = InteractionMode::kTeleoperation;
  double reward_delta = 0.0;  // mean over episodes of regret(solo) - regret(assisted)
  double se = 0.0;
  long n = 0;
};

// The robot used when the robot assumes `assumed`: most_frequent for
// epsilon_optimal, copy for "copy", otherwise the belief assistant with that
// model. `robot_params` are passed to the belief assistant.
PolicySpec assisting_robot(const PolicySpec& assumed, const nlohmann::json& robot_params);

// Expected-reward gain from assistance, paired by episode against the solo
// human on the same instances and reward draws.
GridCell run_cross_model_cell(const ExperimentConfig& base, const PolicySpec& actual, const PolicySpec& assumed,
                              const nlohmann::json& robot_params = nlohmann::json::object());
std::vector<GridCell> run_cross_model_grid(const ExperimentConfig& base, const std::vector<PolicySpec>& actual,
                                           const std::vector<PolicySpec>& assumed,
                                           const nlohmann::json& robot_params = nlohmann::json::object());

}  // namespace amab
