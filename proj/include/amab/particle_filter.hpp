#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "amab/bandit.hpp"
#include "amab/human_policy.hpp"
#include "amab/random.hpp"

namespace amab {

struct ParticleFilterConfig {
  int n_particles = 2048;
  // Resample when ESS < ess_threshold * n_particles.
  double ess_threshold = 0.5;
};

// One hypothesis about (theta, the human's internal state).
//
// When the human model does not read theta (every learner), theta is
// integrated out: given the imputed rewards, each arm's theta is
// Beta(alpha0 + successes, beta0 + failures), so rewards are imputed from
// that predictive and `theta` stays empty until a draw is requested. This is
// the same posterior as carrying an explicit theta, with exact rejuvenation.
struct Particle {
  std::vector<double> theta;
  std::vector<int> successes;
  std::vector<int> failures;
  std::unique_ptr<HumanPolicy> human;
  double weight = 0.0;
};

// Sequential importance resampling over Particles. The human model is cloned
// once per particle; every particle's human copy has observed exactly the
// executed arms and that particle's imputed rewards.
class ParticleSet {
 public:
  ParticleSet(const BetaPrior& prior, const HumanPolicy& model, ParticleFilterConfig config,
              RandomStream rng);

  int size() const { return static_cast<int>(particles_.size()); }
  int n_arms() const { return prior_.n_arms(); }
  const Particle& particle(int i) const { return particles_[static_cast<std::size_t>(i)]; }
  bool collapsed() const { return collapsed_; }
  int rounds() const { return round_; }

  // Multiplies each weight by P(suggestion | particle's human state),
  // normalizes, and resamples systematically if ESS falls below threshold.
  // All-zero weights reset to uniform and count as a degeneracy event.
  void reweight(Arm suggestion);

  // Imputes a reward for `executed` in every particle and advances the
  // human copies.
  void propagate(Arm executed);

  // Draws a particle proportional to weight, then a theta from it.
  std::vector<double> sample_theta(RandomStream& rng) const;
  // Thompson step: argmax of sample_theta (ties uniform).
  Arm thompson_arm(RandomStream& rng) const;

  std::vector<double> posterior_mean() const;
  // Posterior probability that each arm is the best arm.
  std::vector<double> best_arm_posterior() const;

  double effective_sample_size() const;
  int degeneracy_events() const { return degeneracy_events_; }
  int resample_events() const { return resample_events_; }

 private:
  double imputation_probability(const Particle& p, Arm k) const;
  void resample();

  BetaPrior prior_;
  ParticleFilterConfig config_;
  RandomStream rng_;
  bool collapsed_;
  std::vector<Particle> particles_;
  std::vector<Particle> scratch_;
  std::unordered_map<std::uint64_t, double> likelihood_cache_;
  std::vector<double> dist_;
  int round_ = 0;
  int reweights_ = 0;
  int degeneracy_events_ = 0;
  int resample_events_ = 0;
};

}  // namespace amab
