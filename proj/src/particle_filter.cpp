#include "amab/particle_filter.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "amab/beta_math.hpp"

namespace amab {
namespace {

double unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

void copy_particle(const Particle& src, Particle& dst) {
  dst.theta = src.theta;
  dst.successes = src.successes;
  dst.failures = src.failures;
  dst.human->assign(*src.human);
  dst.weight = src.weight;
}

}  // namespace

ParticleSet::ParticleSet(const BetaPrior& prior, const HumanPolicy& model, ParticleFilterConfig config,
                         RandomStream rng)
    : prior_(prior), config_(config), rng_(rng), collapsed_(!model.uses_reward_parameters()) {
  if (config.n_particles < 1) throw std::invalid_argument("particle set needs at least one particle");
  if (!(config.ess_threshold >= 0.0 && config.ess_threshold <= 1.0)) {
    throw std::invalid_argument("ess_threshold must be in [0, 1]");
  }
  if (model.n_arms() != prior.n_arms()) throw std::invalid_argument("model/prior arm count mismatch");
  const auto n = static_cast<std::size_t>(config.n_particles);
  const auto arms = static_cast<std::size_t>(prior.n_arms());
  particles_.resize(n);
  const RandomStream init = rng_.split(0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = particles_[i];
    p.successes.assign(arms, 0);
    p.failures.assign(arms, 0);
    p.human = model.clone();
    p.human->reset();
    p.weight = 1.0 / static_cast<double>(n);
    if (!collapsed_) {
      RandomStream s = init.split(i);
      const auto inst = sample_instance(prior_, s);
      p.theta.assign(inst.theta().begin(), inst.theta().end());
      p.human->bind_reward_parameters(p.theta);
    }
  }
  scratch_.resize(n);
  for (auto& s : scratch_) s.human = model.clone();
  dist_.resize(arms);
}

double ParticleSet::imputation_probability(const Particle& p, Arm k) const {
  const auto i = static_cast<std::size_t>(k);
  const auto& a = prior_.arm(k);
  if (a.known_mean) return *a.known_mean;
  if (!collapsed_) return p.theta[i];
  return (a.alpha + p.successes[i]) / (a.alpha + a.beta + p.successes[i] + p.failures[i]);
}

void ParticleSet::reweight(Arm suggestion) {
  if (suggestion < 0 || suggestion >= n_arms()) throw std::out_of_range("reweight: arm out of range");
  ++reweights_;
  likelihood_cache_.clear();
  double total = 0.0;
  for (auto& p : particles_) {
    if (p.weight == 0.0) continue;
    double like = 0.0;
    if (collapsed_) {
      const std::uint64_t key = p.human->state_fingerprint();
      if (auto it = likelihood_cache_.find(key); it != likelihood_cache_.end()) {
        like = it->second;
      } else {
        p.human->approximate_action_distribution(dist_);
        like = dist_[static_cast<std::size_t>(suggestion)];
        likelihood_cache_.emplace(key, like);
      }
    } else {
      p.human->approximate_action_distribution(dist_);
      like = dist_[static_cast<std::size_t>(suggestion)];
    }
    p.weight *= like;
    total += p.weight;
  }
  if (!(total > 0.0)) {
    ++degeneracy_events_;
    const double w = 1.0 / static_cast<double>(particles_.size());
    for (auto& p : particles_) p.weight = w;
    return;
  }
  for (auto& p : particles_) p.weight /= total;
  if (effective_sample_size() < config_.ess_threshold * static_cast<double>(particles_.size())) {
    resample();
  }
}

void ParticleSet::resample() {
  ++resample_events_;
  const std::size_t n = particles_.size();
  RandomStream r = rng_.split(0x100000000ULL + static_cast<std::uint64_t>(reweights_));
  const double step = 1.0 / static_cast<double>(n);
  double u = r.uniform() * step;
  double cum = particles_[0].weight;
  std::size_t src = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (u > cum && src + 1 < n) {
      ++src;
      cum += particles_[src].weight;
    }
    copy_particle(particles_[src], scratch_[i]);
    scratch_[i].weight = step;
    u += step;
  }
  std::swap(particles_, scratch_);
}

void ParticleSet::propagate(Arm executed) {
  if (executed < 0 || executed >= n_arms()) throw std::out_of_range("propagate: arm out of range");
  ++round_;
  const std::uint64_t round_key = mix64(rng_.key() ^ mix64(0x200000000ULL + static_cast<std::uint64_t>(round_)));
  const auto k = static_cast<std::size_t>(executed);
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    auto& p = particles_[i];
    const double u = unit(mix64(round_key ^ mix64(i)));
    const int r = u < imputation_probability(p, executed) ? 1 : 0;
    if (r != 0) {
      ++p.successes[k];
    } else {
      ++p.failures[k];
    }
    p.human->observe(executed, r);
  }
}

std::vector<double> ParticleSet::sample_theta(RandomStream& rng) const {
  double u = rng.uniform();
  std::size_t pick = particles_.size() - 1;
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    if (u < particles_[i].weight) {
      pick = i;
      break;
    }
    u -= particles_[i].weight;
  }
  const auto& p = particles_[pick];
  if (!collapsed_) return p.theta;
  std::vector<double> theta(static_cast<std::size_t>(n_arms()));
  for (Arm k = 0; k < n_arms(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const auto& a = prior_.arm(k);
    theta[i] = a.known_mean ? *a.known_mean : rng.beta(a.alpha + p.successes[i], a.beta + p.failures[i]);
  }
  return theta;
}

Arm ParticleSet::thompson_arm(RandomStream& rng) const {
  const auto theta = sample_theta(rng);
  return sample_argmax(theta, rng);
}

std::vector<double> ParticleSet::posterior_mean() const {
  std::vector<double> m(static_cast<std::size_t>(n_arms()), 0.0);
  for (const auto& p : particles_) {
    for (Arm k = 0; k < n_arms(); ++k) {
      m[static_cast<std::size_t>(k)] += p.weight * imputation_probability(p, k);
    }
  }
  return m;
}

std::vector<double> ParticleSet::best_arm_posterior() const {
  const auto arms = static_cast<std::size_t>(n_arms());
  std::vector<double> mass(arms, 0.0);
  bool any_known = false;
  for (Arm k = 0; k < n_arms(); ++k) any_known = any_known || prior_.is_known(k);
  if (!collapsed_) {
    for (const auto& p : particles_) {
      const auto best = static_cast<std::size_t>(std::max_element(p.theta.begin(), p.theta.end()) - p.theta.begin());
      mass[best] += p.weight;
    }
    return mass;
  }
  std::vector<double> a(arms);
  std::vector<double> b(arms);
  std::vector<double> probs(arms);
  RandomStream r = rng_.split(0x300000000ULL + static_cast<std::uint64_t>(round_));
  for (const auto& p : particles_) {
    if (p.weight == 0.0) continue;
    if (any_known) {
      std::vector<double> theta(arms);
      for (std::size_t i = 0; i < arms; ++i) {
        const auto& pa = prior_.arm(static_cast<Arm>(i));
        theta[i] = pa.known_mean ? *pa.known_mean : r.beta(pa.alpha + p.successes[i], pa.beta + p.failures[i]);
      }
      mass[static_cast<std::size_t>(std::max_element(theta.begin(), theta.end()) - theta.begin())] += p.weight;
      continue;
    }
    for (std::size_t i = 0; i < arms; ++i) {
      const auto& pa = prior_.arm(static_cast<Arm>(i));
      a[i] = pa.alpha + p.successes[i];
      b[i] = pa.beta + p.failures[i];
    }
    beta_argmax_probabilities(a, b, probs);
    for (std::size_t i = 0; i < arms; ++i) mass[i] += p.weight * probs[i];
  }
  return mass;
}

double ParticleSet::effective_sample_size() const {
  double s2 = 0.0;
  for (const auto& p : particles_) s2 += p.weight * p.weight;
  return s2 > 0.0 ? 1.0 / s2 : 0.0;
}

}  // namespace amab
