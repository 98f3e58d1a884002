#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "amab/random.hpp"

namespace amab {

// Arms are 0-based throughout (arm k here is arm k+1 in 1-based notation).
using Arm = int;

// Beta(alpha, beta) prior for one arm. An arm with `known_mean` set is a
// disclosed arm: its parameter is fixed and every agent knows it.
struct ArmPrior {
  double alpha = 1.0;
  double beta = 1.0;
  std::optional<double> known_mean;
};

class BetaPrior {
 public:
  BetaPrior() = default;
  explicit BetaPrior(std::vector<ArmPrior> arms);

  // Beta(alpha, beta) on every arm.
  static BetaPrior uniform(int n_arms, double alpha = 1.0, double beta = 1.0);

  // Two arms: arm 0 known with the given mean, arm 1 ~ Beta(1, 1).
  static BetaPrior one_and_a_half(double known_mean = 0.5);

  int n_arms() const { return static_cast<int>(arms_.size()); }
  const ArmPrior& arm(Arm k) const { return arms_.at(static_cast<std::size_t>(k)); }
  std::span<const ArmPrior> arms() const { return arms_; }
  bool is_known(Arm k) const { return arm(k).known_mean.has_value(); }

 private:
  std::vector<ArmPrior> arms_;
};

// Bernoulli bandit with parameters theta. Best-arm ties break to the lowest
// index.
class BanditInstance {
 public:
  BanditInstance() = default;
  explicit BanditInstance(std::vector<double> theta);

  int n_arms() const { return static_cast<int>(theta_.size()); }
  std::span<const double> theta() const { return theta_; }
  double mean(Arm k) const { return theta_.at(static_cast<std::size_t>(k)); }
  Arm best_arm() const { return best_arm_; }
  double best_mean() const { return best_mean_; }
  double gap(Arm k) const { return best_mean_ - mean(k); }

 private:
  std::vector<double> theta_;
  Arm best_arm_ = 0;
  double best_mean_ = 0.0;
};

BanditInstance sample_instance(const BetaPrior& prior, RandomStream& rng);

// One Bernoulli(theta_arm) reward. Consumes exactly one uniform draw so that
// reward streams stay coupled across policies.
int pull(const BanditInstance& instance, Arm arm, RandomStream& rng);

struct StepRecord {
  int t = 0;  // 1-based round
  std::optional<Arm> human_arm;
  Arm executed_arm = 0;
  int reward = 0;
};

struct Trajectory {
  BanditInstance instance;
  std::vector<StepRecord> steps;
  std::uint64_t episode_seed = 0;
};

// Pull counts and cumulative regret, maintained incrementally.
class RegretLedger {
 public:
  explicit RegretLedger(const BanditInstance& instance);

  void record(Arm executed);

  std::span<const std::int64_t> pull_counts() const { return counts_; }
  std::int64_t rounds() const { return rounds_; }
  double cumulative_regret() const { return regret_; }
  // Sum over arms of gap * count, from scratch.
  double recomputed_regret() const;

 private:
  BanditInstance instance_;
  std::vector<std::int64_t> counts_;
  std::int64_t rounds_ = 0;
  double regret_ = 0.0;
};

// Regret of the executed arms (never the suggestions).
double regret_of(const BanditInstance& instance, const Trajectory& trajectory);
double regret_of(const BanditInstance& instance, std::span<const Arm> executed);

// Fraction of each arm in a nonempty arm sequence.
std::vector<double> empirical_frequencies(std::span<const Arm> arms, int n_arms);

}  // namespace amab
