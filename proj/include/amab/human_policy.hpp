#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amab/bandit.hpp"
#include "amab/gittins.hpp"
#include "amab/random.hpp"

namespace amab {

// Per-arm Beta(alpha, beta) posterior over Bernoulli means.
class BeliefState {
 public:
  BeliefState() = default;
  explicit BeliefState(const BetaPrior& prior);

  int n_arms() const { return static_cast<int>(alpha_.size()); }
  double alpha(Arm k) const { return alpha_[static_cast<std::size_t>(k)]; }
  double beta(Arm k) const { return beta_[static_cast<std::size_t>(k)]; }
  std::span<const double> alphas() const { return alpha_; }
  std::span<const double> betas() const { return beta_; }
  // Posterior mean, or the disclosed mean for a known arm.
  double mean(Arm k) const;
  bool known(Arm k) const { return known_[static_cast<std::size_t>(k)].has_value(); }
  std::optional<double> known_mean(Arm k) const { return known_[static_cast<std::size_t>(k)]; }

  void observe(Arm k, int reward);
  void reset();
  std::uint64_t fingerprint() const;

 private:
  std::vector<double> alpha0_;
  std::vector<double> beta0_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  std::vector<std::optional<double>> known_;
};

// A bandit learner (or informed baseline). The same interface serves as the
// inner policy of a decoding robot, since a standard MAB strategy is exactly
// a map from (arm, reward) history to an arm distribution.
class HumanPolicy {
 public:
  explicit HumanPolicy(int n_arms);
  virtual ~HumanPolicy() = default;

  virtual std::string name() const = 0;
  int n_arms() const { return n_arms_; }

  virtual void reset() = 0;
  virtual void observe(Arm executed, int reward) = 0;
  virtual Arm suggest(RandomStream& rng) const = 0;

  // Exact suggestion distribution at the current state. Returns false when
  // only Monte-Carlo evaluation is available; `out` is then unspecified.
  virtual bool action_distribution(std::span<double> out) const = 0;

  // Deterministic approximation of the suggestion distribution, equal to
  // action_distribution() whenever that is exact.
  virtual void approximate_action_distribution(std::span<double> out) const;

  // Unbiased estimate: exact when available, otherwise the empirical
  // frequencies of m suggestions.
  void estimate_action_distribution(std::span<double> out, int m, RandomStream& rng) const;

  // Informed policies (epsilon-optimal) read the true parameters.
  virtual bool uses_reward_parameters() const { return false; }
  virtual void bind_reward_parameters(std::span<const double> /*theta*/) {}

  virtual std::unique_ptr<HumanPolicy> clone() const = 0;
  // Copies the state of a policy of the same dynamic type.
  virtual void assign(const HumanPolicy& other) = 0;
  // Hash of the internal state; equal states give equal fingerprints.
  virtual std::uint64_t state_fingerprint() const = 0;

 private:
  int n_arms_;
};

template <class Derived>
class ClonableHumanPolicy : public HumanPolicy {
 public:
  using HumanPolicy::HumanPolicy;
  std::unique_ptr<HumanPolicy> clone() const override {
    return std::make_unique<Derived>(static_cast<const Derived&>(*this));
  }
  void assign(const HumanPolicy& other) override {
    static_cast<Derived&>(*this) = dynamic_cast<const Derived&>(other);
  }
};

// --- distributions ---------------------------------------------------------

// Uniform over the argmax set of `values`.
void argmax_distribution(std::span<const double> values, std::span<double> out);
// Draws uniformly among the maximizers.
Arm sample_argmax(std::span<const double> values, RandomStream& rng);
// Draws an index with the given probabilities.
Arm sample_categorical(std::span<const double> probs, RandomStream& rng);

// 1 - epsilon split uniformly over the argmax arms, plus epsilon / N on every
// arm.
void epsilon_greedy_distribution(std::span<const double> means, double epsilon,
                                 std::span<double> out);

// Round 1 (no previous arm): uniform. Otherwise stay after a win, and shift
// uniformly to another arm after a loss.
void wsls_distribution(std::optional<Arm> last_arm, int last_reward, std::span<double> out);

// Mean of n_draws posterior samples per arm, then argmax. n_draws == 0 means
// infinitely many, i.e. argmax of the posterior means.
Arm thompson_sample(const BeliefState& belief, int n_draws, RandomStream& rng);

// The 1 - 1/(K t) quantile of Beta(alpha, beta), level clamped to
// [0.5, 1 - 1e-12].
double ucl_index(double alpha, double beta, int t, double k);

enum class SoftmaxOrientation { kInverseTemperature, kTemperature };

// P(i) proportional to exp(tau * Q_i) (inverse temperature) or exp(Q_i / tau).
void ucl_distribution(std::span<const double> indices, double tau, SoftmaxOrientation orientation,
                      std::span<double> out);

// 1 - epsilon on the best arm plus epsilon / N everywhere.
void epsilon_optimal_distribution(std::span<const double> theta, double epsilon,
                                  std::span<double> out);

// Round 1: uniform. Afterwards arm 0 after reward 0 and arm 1 after reward 1.
Arm communicative_suggestion(std::optional<int> last_reward, int n_arms, RandomStream& rng);

// --- policies --------------------------------------------------------------

class EpsilonGreedy final : public ClonableHumanPolicy<EpsilonGreedy> {
 public:
  EpsilonGreedy(const BetaPrior& prior, double epsilon);

  std::string name() const override { return "epsilon_greedy"; }
  double epsilon() const { return epsilon_; }
  void reset() override;
  void observe(Arm executed, int reward) override;
  Arm suggest(RandomStream& rng) const override;
  bool action_distribution(std::span<double> out) const override;
  std::uint64_t state_fingerprint() const override;

  // Hindsight means: sample mean for pulled arms, the prior mean for unpulled
  // arms (0.5 under the uniform prior), the disclosed mean for known arms.
  std::vector<double> hindsight_means() const;

 private:
  double epsilon_;
  std::vector<double> prior_mean_;
  std::vector<std::optional<double>> known_;
  std::vector<int> pulls_;
  std::vector<int> successes_;
};

class WinStayLoseShift final : public ClonableHumanPolicy<WinStayLoseShift> {
 public:
  explicit WinStayLoseShift(int n_arms);

  std::string name() const override { return "wsls"; }
  void reset() override;
  void observe(Arm executed, int reward) override;
  Arm suggest(RandomStream& rng) const override;
  bool action_distribution(std::span<double> out) const override;
  std::uint64_t state_fingerprint() const override;

 private:
  std::optional<Arm> last_arm_;
  int last_reward_ = 0;
};

class ThompsonSampling final : public ClonableHumanPolicy<ThompsonSampling> {
 public:
  // n_draws == 0 is the infinite-draw (posterior mean) variant.
  ThompsonSampling(const BetaPrior& prior, int n_draws);

  std::string name() const override { return "thompson"; }
  int n_draws() const { return n_draws_; }
  const BeliefState& belief() const { return belief_; }
  void reset() override { belief_.reset(); }
  void observe(Arm executed, int reward) override { belief_.observe(executed, reward); }
  Arm suggest(RandomStream& rng) const override;
  bool action_distribution(std::span<double> out) const override;
  void approximate_action_distribution(std::span<double> out) const override;
  std::uint64_t state_fingerprint() const override { return belief_.fingerprint(); }

 private:
  bool has_known_arm() const;

  BeliefState belief_;
  int n_draws_;
};

class UpperCredibleLimit final : public ClonableHumanPolicy<UpperCredibleLimit> {
 public:
  UpperCredibleLimit(const BetaPrior& prior, double k = 4.0, double tau = 4.0,
                     SoftmaxOrientation orientation = SoftmaxOrientation::kInverseTemperature);

  std::string name() const override { return "ucl"; }
  void reset() override;
  void observe(Arm executed, int reward) override;
  Arm suggest(RandomStream& rng) const override;
  bool action_distribution(std::span<double> out) const override;
  std::uint64_t state_fingerprint() const override;

  std::vector<double> indices() const;

 private:
  BeliefState belief_;
  double k_;
  double tau_;
  SoftmaxOrientation orientation_;
  int t_ = 1;
};

class GittinsIndexPolicy final : public ClonableHumanPolicy<GittinsIndexPolicy> {
 public:
  GittinsIndexPolicy(const BetaPrior& prior, std::shared_ptr<const GittinsTable> table);

  std::string name() const override { return "gittins"; }
  void reset() override { belief_.reset(); }
  void observe(Arm executed, int reward) override { belief_.observe(executed, reward); }
  Arm suggest(RandomStream& rng) const override;
  bool action_distribution(std::span<double> out) const override;
  std::uint64_t state_fingerprint() const override { return belief_.fingerprint(); }

  std::vector<double> indices() const;

 private:
  BeliefState belief_;
  std::shared_ptr<const GittinsTable> table_;
};

// Knows theta; i.i.d. across rounds.
class EpsilonOptimal final : public ClonableHumanPolicy<EpsilonOptimal> {
 public:
  EpsilonOptimal(int n_arms, double epsilon);

  std::string name() const override { return "epsilon_optimal"; }
  void reset() override {}
  void observe(Arm, int) override {}
  Arm suggest(RandomStream& rng) const override;
  bool action_distribution(std::span<double> out) const override;
  bool uses_reward_parameters() const override { return true; }
  void bind_reward_parameters(std::span<const double> theta) override;
  std::uint64_t state_fingerprint() const override;

 private:
  double epsilon_;
  std::vector<double> theta_;
};

class Communicative final : public ClonableHumanPolicy<Communicative> {
 public:
  explicit Communicative(int n_arms);

  std::string name() const override { return "communicative"; }
  void reset() override { last_reward_.reset(); }
  void observe(Arm, int reward) override { last_reward_ = reward; }
  Arm suggest(RandomStream& rng) const override;
  bool action_distribution(std::span<double> out) const override;
  std::uint64_t state_fingerprint() const override;

 private:
  std::optional<int> last_reward_;
};

// Always suggests the same arm.
class ConstantHuman final : public ClonableHumanPolicy<ConstantHuman> {
 public:
  ConstantHuman(int n_arms, Arm arm);

  std::string name() const override { return "constant"; }
  void reset() override {}
  void observe(Arm, int) override {}
  Arm suggest(RandomStream&) const override { return arm_; }
  bool action_distribution(std::span<double> out) const override;
  std::uint64_t state_fingerprint() const override { return static_cast<std::uint64_t>(arm_); }

 private:
  Arm arm_;
};

}  // namespace amab
