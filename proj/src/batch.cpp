#include "amab/batch.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "amab/episode.hpp"
#include "amab/stats.hpp"

namespace amab {
namespace {

constexpr long kChunk = 512;
constexpr std::uint64_t kSharedExperiment = 0;

struct ChunkSums {
  std::vector<double> cum_regret;
  double regret = 0.0;
  long ok = 0;
};

}  // namespace

EpisodeSeeds episode_seeds(std::uint64_t master_seed, std::uint64_t episode) {
  const SeedTree tree(master_seed);
  EpisodeSeeds s;
  s.instance_key = tree.derive_key(kSharedExperiment, episode, StreamRole::kInstance);
  s.instance = RandomStream(s.instance_key);
  s.environment = tree.stream(kSharedExperiment, episode, StreamRole::kEnvironment);
  s.human = tree.stream(kSharedExperiment, episode, StreamRole::kHuman);
  s.robot = tree.stream(kSharedExperiment, episode, StreamRole::kRobot);
  s.particles = tree.stream(kSharedExperiment, episode, StreamRole::kParticles);
  return s;
}

BanditInstance episode_instance(const ExperimentConfig& config, EpisodeSeeds& seeds) {
  if (config.theta) return BanditInstance(*config.theta);
  return sample_instance(config.beta_prior(), seeds.instance);
}

Trajectory run_episode(const ExperimentConfig& config, std::uint64_t episode, StreamCoupling coupling) {
  EpisodeSeeds seeds = episode_seeds(config.seed, episode);
  if (coupling == StreamCoupling::kHumanOnRobotStream) seeds.human = seeds.robot;
  const BetaPrior prior = config.beta_prior();
  const BanditInstance instance = episode_instance(config, seeds);
  auto human = make_human(config.human, prior);
  auto robot = make_robot(config, prior, seeds.particles);
  EpisodeStreams streams{seeds.environment, seeds.human, seeds.robot};
  Trajectory traj = simulate_episode(config.mode, instance, *human, robot.get(), config.horizon, streams,
                                     ProtocolOptions{config.human_first});
  traj.episode_seed = seeds.instance_key;
  return traj;
}

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (long i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

BatchResult run_batch(const ExperimentConfig& config, const BatchOptions& options) {
  validate(config);
  const long n = config.n_episodes;
  const auto horizon = static_cast<std::size_t>(config.horizon);
  const long n_chunks = (n + kChunk - 1) / kChunk;
  BatchResult result;
  result.regrets.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
  if (options.keep_trajectories) result.trajectories.resize(static_cast<std::size_t>(n));
  std::vector<ChunkSums> chunks(static_cast<std::size_t>(n_chunks));
  std::vector<std::vector<FailedEpisode>> chunk_failures(static_cast<std::size_t>(n_chunks));

  parallel_for(n_chunks, options.threads > 0 ? options.threads : config.threads, [&](long c) {
    auto& sums = chunks[static_cast<std::size_t>(c)];
    sums.cum_regret.assign(horizon, 0.0);
    const long end = std::min(n, (c + 1) * kChunk);
    for (long e = c * kChunk; e < end; ++e) {
      Trajectory traj;
      try {
        traj = run_episode(config, static_cast<std::uint64_t>(e), options.coupling);
      } catch (const std::exception& ex) {
        chunk_failures[static_cast<std::size_t>(c)].push_back(
            {static_cast<std::uint64_t>(e), episode_seeds(config.seed, static_cast<std::uint64_t>(e)).instance_key,
             ex.what()});
        continue;
      }
      double cum = 0.0;
      for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        cum += traj.instance.gap(traj.steps[t].executed_arm);
        sums.cum_regret[t] += cum;
      }
      sums.regret += cum;
      ++sums.ok;
      result.regrets[static_cast<std::size_t>(e)] = cum;
      if (options.keep_trajectories) result.trajectories[static_cast<std::size_t>(e)] = std::move(traj);
    }
  });

  auto& s = result.summary;
  s.human_policy = config.human.label();
  s.robot_policy = config.robot.label();
  s.mode = std::string(to_string(config.mode));
  s.mean_cum_regret.assign(horizon, 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    for (std::size_t t = 0; t < horizon; ++t) s.mean_cum_regret[t] += chunks[c].cum_regret[t];
    total += chunks[c].regret;
    s.n_episodes += chunks[c].ok;
    for (auto& f : chunk_failures[c]) s.failures.push_back(std::move(f));
  }
  if (s.n_episodes > 0) {
    const auto k = static_cast<double>(s.n_episodes);
    for (auto& v : s.mean_cum_regret) v /= k;
    s.mean_regret = total / k;
    double ss = 0.0;
    for (double r : result.regrets) {
      if (!std::isnan(r)) ss += (r - s.mean_regret) * (r - s.mean_regret);
    }
    s.se = s.n_episodes > 1 ? std::sqrt(ss / (k - 1.0)) / std::sqrt(k) : 0.0;
  }
  return result;
}

PolicySpec assisting_robot(const PolicySpec& assumed, const nlohmann::json& robot_params) {
  if (assumed.name == "epsilon_optimal") return {"most_frequent", nlohmann::json::object()};
  if (assumed.name == "copy") return {"copy", nlohmann::json::object()};
  PolicySpec r{"belief", robot_params.is_object() ? robot_params : nlohmann::json::object()};
  r.params["model"] = to_json(assumed);
  return r;
}

GridCell run_cross_model_cell(const ExperimentConfig& base, const PolicySpec& actual, const PolicySpec& assumed,
                              const nlohmann::json& robot_params) {
  ExperimentConfig solo = base;
  solo.human = actual;
  solo.mode = InteractionMode::kSolo;
  solo.robot = {"none", nlohmann::json::object()};
  solo.assumed_human.reset();
  ExperimentConfig assisted = base;
  assisted.human = actual;
  assisted.robot = assisting_robot(assumed, robot_params);
  assisted.assumed_human.reset();
  if (is_solo(assisted.mode)) assisted.mode = InteractionMode::kTeleoperation;
  const auto a = run_batch(assisted);
  const auto b = run_batch(solo);
  std::vector<double> delta;
  delta.reserve(a.regrets.size());
  for (std::size_t i = 0; i < a.regrets.size(); ++i) {
    if (!std::isnan(a.regrets[i]) && !std::isnan(b.regrets[i])) delta.push_back(b.regrets[i] - a.regrets[i]);
  }
  const MeanSe m = mean_se(delta);
  GridCell cell;
  cell.actual = actual;
  cell.assumed = assumed;
  cell.mode = assisted.mode;
  cell.reward_delta = m.mean;
  cell.se = m.se;
  cell.n = m.n;
  return cell;
}

std::vector<GridCell> run_cross_model_grid(const ExperimentConfig& base, const std::vector<PolicySpec>& actual,
                                           const std::vector<PolicySpec>& assumed,
                                           const nlohmann::json& robot_params) {
  std::vector<GridCell> cells;
  for (const auto& h : actual) {
    for (const auto& m : assumed) cells.push_back(run_cross_model_cell(base, h, m, robot_params));
  }
  return cells;
}

}  // namespace amab
