#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "amab/bandit.hpp"
#include "amab/human_policy.hpp"
#include "amab/random.hpp"

namespace amab {

// Arm choices of a human playing a standard bandit alone; no rewards.
struct ActionOnlyObservation {
  int n_arms = 0;
  std::vector<Arm> actions;

  int horizon() const { return static_cast<int>(actions.size()); }
};

inline constexpr int kMaxExactHorizon = 12;

// P(h_1..h_t | theta), marginalizing the human's unobserved rewards
// r_1..r_{t-1} by enumeration. The model must have an exact
// action_distribution and t <= kMaxExactHorizon.
double exact_sequence_likelihood(const HumanPolicy& model, const ActionOnlyObservation& observation,
                                 std::span<const double> theta);

// The same likelihood with the enumeration done once. For models that do not
// read theta, P(h | theta) = sum over reward paths of w(path) *
// prod_k theta_k^s_k (1 - theta_k)^f_k, where w(path) is the product of
// action probabilities along the path and (s, f) are the path's per-arm
// success/failure counts. Paths with equal counts are merged.
class SequenceLikelihood {
 public:
  SequenceLikelihood(const HumanPolicy& model, const ActionOnlyObservation& observation);

  double operator()(std::span<const double> theta) const;
  std::size_t terms() const { return weights_.size(); }
  bool compiled() const { return !model_; }

  // Exact posterior log density at theta under a Beta prior (no known arms).
  // Only for compiled (reward-parameter-free) models.
  double log_posterior_density(std::span<const double> theta, const BetaPrior& prior) const;

 private:
  int n_arms_;
  std::unique_ptr<HumanPolicy> model_;  // set only for theta-dependent models
  ActionOnlyObservation observation_;
  std::vector<double> weights_;
  std::vector<int> counts_;  // per term: s_0, f_0, s_1, f_1, ...
};

// Unbiased Monte-Carlo estimate from m simulated reward paths. Policies
// without an exact distribution contribute an unbiased per-step estimate.
double mc_sequence_likelihood(const HumanPolicy& model, const ActionOnlyObservation& observation,
                              std::span<const double> theta, int m, RandomStream& rng);

struct MhConfig {
  int n_samples = 2000;           // kept after burn-in and thinning, over all chains
  int iterations_per_chain = 5000;
  int n_chains = 4;
  double burn_in_fraction = 0.2;
  double initial_scale = 0.5;     // Gaussian proposal scale on logit(theta)
  double target_acceptance = 0.3;
  bool monte_carlo_likelihood = false;
  int mc_paths = 64;
};

struct PosteriorSampleSet {
  std::vector<std::vector<double>> samples;
  double acceptance_rate = 0.0;
  int n_chains = 0;
  int burn_in = 0;
  double proposal_scale = 0.0;

  std::vector<double> marginal_means() const;
};

class DegenerateChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Random-walk Metropolis-Hastings on logit(theta) under the prior, with the
// proposal scale tuned toward the target acceptance during burn-in. Uses the
// exact likelihood unless config.monte_carlo_likelihood (pseudo-marginal).
// Throws DegenerateChainError if the post-burn-in acceptance is below 0.01.
PosteriorSampleSet mh_posterior(const ActionOnlyObservation& observation, const HumanPolicy& model,
                                const BetaPrior& prior, const MhConfig& config, RandomStream& rng);

// Natural-log kernel density at `theta` from posterior samples: product
// Gaussian kernels with Scott's-rule bandwidth per dimension, reflected at 0
// and 1.
double log_density_at(std::span<const double> theta, const PosteriorSampleSet& samples);

}  // namespace amab
