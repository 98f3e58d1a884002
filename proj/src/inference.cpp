#include "amab/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace amab {
namespace {

void check_observation(const HumanPolicy& model, const ActionOnlyObservation& obs) {
  if (obs.n_arms != model.n_arms()) throw std::invalid_argument("observation/model arm count mismatch");
  for (Arm a : obs.actions) {
    if (a < 0 || a >= obs.n_arms) throw std::out_of_range("observed arm out of range");
  }
}

void check_theta(std::span<const double> theta, int n_arms) {
  if (static_cast<int>(theta.size()) != n_arms) throw std::invalid_argument("theta has wrong length");
}

// Sum over reward paths of prod_k P(h_k | state) * P(r_k | theta, h_k).
double enumerate(const HumanPolicy& human, const ActionOnlyObservation& obs, std::span<const double> theta,
                 std::size_t k, std::vector<double>& dist) {
  if (k == obs.actions.size()) return 1.0;
  if (!human.action_distribution(dist)) {
    throw std::invalid_argument("model '" + human.name() + "' has no exact likelihood; use mc_sequence_likelihood");
  }
  const Arm h = obs.actions[k];
  const double p = dist[static_cast<std::size_t>(h)];
  if (p == 0.0) return 0.0;
  if (k + 1 == obs.actions.size()) return p;
  const double th = theta[static_cast<std::size_t>(h)];
  auto lose = human.clone();
  lose->observe(h, 0);
  auto win = human.clone();
  win->observe(h, 1);
  // Reward-blind states (epsilon-optimal, constant) collapse to one branch.
  if (lose->state_fingerprint() == win->state_fingerprint()) return p * enumerate(*win, obs, theta, k + 1, dist);
  double total = 0.0;
  if (th > 0.0) total += th * enumerate(*win, obs, theta, k + 1, dist);
  if (th < 1.0) total += (1.0 - th) * enumerate(*lose, obs, theta, k + 1, dist);
  return p * total;
}

struct PathState {
  std::unique_ptr<HumanPolicy> human;
  double weight;
  std::vector<int> counts;
};

double logit(double p) { return std::log(p / (1.0 - p)); }
double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double exact_sequence_likelihood(const HumanPolicy& model, const ActionOnlyObservation& observation,
                                 std::span<const double> theta) {
  check_observation(model, observation);
  check_theta(theta, observation.n_arms);
  if (observation.horizon() > kMaxExactHorizon) throw std::invalid_argument("horizon too long for enumeration");
  auto human = model.clone();
  human->reset();
  if (human->uses_reward_parameters()) human->bind_reward_parameters(theta);
  std::vector<double> dist(static_cast<std::size_t>(observation.n_arms));
  return enumerate(*human, observation, theta, 0, dist);
}

SequenceLikelihood::SequenceLikelihood(const HumanPolicy& model, const ActionOnlyObservation& observation)
    : n_arms_(observation.n_arms), observation_(observation) {
  check_observation(model, observation);
  if (observation.horizon() > kMaxExactHorizon) throw std::invalid_argument("horizon too long for enumeration");
  if (model.uses_reward_parameters()) {
    model_ = model.clone();
    return;
  }
  const auto arms = static_cast<std::size_t>(n_arms_);
  std::vector<double> dist(arms);
  std::vector<PathState> paths;
  paths.push_back({model.clone(), 1.0, std::vector<int>(2 * arms, 0)});
  paths.back().human->reset();
  for (std::size_t k = 0; k < observation.actions.size(); ++k) {
    const Arm h = observation.actions[k];
    const auto hi = static_cast<std::size_t>(h);
    const bool last = k + 1 == observation.actions.size();
    std::vector<PathState> next;
    for (auto& path : paths) {
      if (!path.human->action_distribution(dist)) {
        throw std::invalid_argument("model '" + model.name() + "' has no exact likelihood");
      }
      const double w = path.weight * dist[hi];
      if (w == 0.0) continue;
      if (last) {
        next.push_back({nullptr, w, std::move(path.counts)});
        continue;
      }
      for (int r = 0; r < 2; ++r) {
        PathState child{path.human->clone(), w, path.counts};
        child.human->observe(h, r);
        ++child.counts[2 * hi + (r == 1 ? 0 : 1)];
        next.push_back(std::move(child));
      }
    }
    paths = std::move(next);
  }
  std::map<std::vector<int>, double> merged;
  for (auto& p : paths) merged[p.counts] += p.weight;
  for (const auto& [counts, w] : merged) {
    weights_.push_back(w);
    counts_.insert(counts_.end(), counts.begin(), counts.end());
  }
}

double SequenceLikelihood::operator()(std::span<const double> theta) const {
  check_theta(theta, n_arms_);
  if (model_) return exact_sequence_likelihood(*model_, observation_, theta);
  const auto arms = static_cast<std::size_t>(n_arms_);
  double total = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    double term = weights_[j];
    const int* c = &counts_[j * 2 * arms];
    for (std::size_t i = 0; i < arms; ++i) {
      if (c[2 * i] != 0) term *= std::pow(theta[i], c[2 * i]);
      if (c[2 * i + 1] != 0) term *= std::pow(1.0 - theta[i], c[2 * i + 1]);
    }
    total += term;
  }
  return total;
}

double SequenceLikelihood::log_posterior_density(std::span<const double> theta, const BetaPrior& prior) const {
  check_theta(theta, n_arms_);
  if (model_) throw std::logic_error("exact posterior density needs a reward-parameter-free model");
  if (prior.n_arms() != n_arms_) throw std::invalid_argument("prior arm count mismatch");
  const auto arms = static_cast<std::size_t>(n_arms_);
  auto lbeta = [](double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); };
  // evidence: sum_j w_j prod_i B(a_i + s_i, b_i + f_i) / B(a_i, b_i)
  double evidence = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    const int* c = &counts_[j * 2 * arms];
    double log_term = std::log(weights_[j]);
    for (std::size_t i = 0; i < arms; ++i) {
      const auto& a = prior.arm(static_cast<Arm>(i));
      if (a.known_mean) throw std::invalid_argument("exact posterior density needs every arm unknown");
      log_term += lbeta(a.alpha + c[2 * i], a.beta + c[2 * i + 1]) - lbeta(a.alpha, a.beta);
    }
    evidence += std::exp(log_term);
  }
  double log_prior = 0.0;
  for (std::size_t i = 0; i < arms; ++i) {
    const auto& a = prior.arm(static_cast<Arm>(i));
    log_prior += (a.alpha - 1.0) * std::log(theta[i]) + (a.beta - 1.0) * std::log1p(-theta[i]) - lbeta(a.alpha, a.beta);
  }
  return std::log((*this)(theta)) + log_prior - std::log(evidence);
}

double mc_sequence_likelihood(const HumanPolicy& model, const ActionOnlyObservation& observation,
                              std::span<const double> theta, int m, RandomStream& rng) {
  if (m < 1) throw std::invalid_argument("mc_sequence_likelihood needs m >= 1");
  check_observation(model, observation);
  check_theta(theta, observation.n_arms);
  std::vector<double> dist(static_cast<std::size_t>(observation.n_arms));
  auto human = model.clone();
  double total = 0.0;
  for (int s = 0; s < m; ++s) {
    human->reset();
    if (human->uses_reward_parameters()) human->bind_reward_parameters(theta);
    double prob = 1.0;
    for (Arm h : observation.actions) {
      human->estimate_action_distribution(dist, 16, rng);
      prob *= dist[static_cast<std::size_t>(h)];
      if (prob == 0.0) break;
      human->observe(h, rng.bernoulli(theta[static_cast<std::size_t>(h)]) ? 1 : 0);
    }
    total += prob;
  }
  return total / m;
}

std::vector<double> PosteriorSampleSet::marginal_means() const {
  if (samples.empty()) return {};
  std::vector<double> m(samples.front().size(), 0.0);
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += s[i];
  }
  for (auto& v : m) v /= static_cast<double>(samples.size());
  return m;
}

PosteriorSampleSet mh_posterior(const ActionOnlyObservation& observation, const HumanPolicy& model,
                                const BetaPrior& prior, const MhConfig& config, RandomStream& rng) {
  check_observation(model, observation);
  if (prior.n_arms() != observation.n_arms) throw std::invalid_argument("prior/observation arm count mismatch");
  for (Arm k = 0; k < prior.n_arms(); ++k) {
    if (prior.is_known(k)) throw std::invalid_argument("mh_posterior does not support known arms");
  }
  if (!(config.initial_scale > 0.0)) throw std::invalid_argument("proposal scale must be positive");
  if (config.n_chains < 1 || config.n_samples < 1) throw std::invalid_argument("need chains and samples");
  const int burn = static_cast<int>(config.burn_in_fraction * config.iterations_per_chain);
  const int kept_iters = config.iterations_per_chain - burn;
  const int per_chain = (config.n_samples + config.n_chains - 1) / config.n_chains;
  if (kept_iters < per_chain) throw std::invalid_argument("not enough post-burn-in iterations for the sample count");

  std::unique_ptr<SequenceLikelihood> exact;
  if (!config.monte_carlo_likelihood) exact = std::make_unique<SequenceLikelihood>(model, observation);

  const auto n = static_cast<std::size_t>(prior.n_arms());
  PosteriorSampleSet out;
  out.n_chains = config.n_chains;
  out.burn_in = burn;
  long accepted_after_burn = 0;
  long proposed_after_burn = 0;
  double scale_sum = 0.0;

  for (int c = 0; c < config.n_chains; ++c) {
    RandomStream chain = rng.split(static_cast<std::uint64_t>(c));
    auto likelihood = [&](std::span<const double> th) {
      return exact ? (*exact)(th) : mc_sequence_likelihood(model, observation, th, config.mc_paths, chain);
    };
    // Log target in logit space: log L(theta) + sum_i [alpha_i log theta_i + beta_i log(1 - theta_i)],
    // the Beta prior times the logistic Jacobian theta (1 - theta).
    auto log_prior_jac = [&](std::span<const double> th) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& a = prior.arm(static_cast<Arm>(i));
        s += a.alpha * std::log(th[i]) + a.beta * std::log1p(-th[i]);
      }
      return s;
    };
    std::vector<double> z(n);
    std::vector<double> theta(n);
    double log_like = -std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < 1000 && !std::isfinite(log_like); ++attempt) {
      for (std::size_t i = 0; i < n; ++i) {
        theta[i] = std::clamp(chain.uniform(), 1e-6, 1.0 - 1e-6);
        z[i] = logit(theta[i]);
      }
      log_like = std::log(likelihood(theta));
    }
    if (!std::isfinite(log_like)) throw DegenerateChainError("no starting point with positive likelihood");
    double log_target = log_like + log_prior_jac(theta);

    double scale = config.initial_scale;
    int window_accepts = 0;
    int window = 0;
    const int thin = kept_iters / per_chain;
    int kept = 0;
    std::vector<double> zp(n);
    std::vector<double> thp(n);
    for (int it = 0; it < config.iterations_per_chain; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        zp[i] = z[i] + scale * chain.normal();
        thp[i] = logistic(zp[i]);
      }
      bool accept = false;
      bool interior = true;
      for (double v : thp) interior = interior && v > 0.0 && v < 1.0;
      if (interior) {
        const double ll = std::log(likelihood(thp));
        const double lt = ll + log_prior_jac(thp);
        if (std::isfinite(lt) && std::log(chain.uniform()) < lt - log_target) {
          accept = true;
          z = zp;
          theta = thp;
          log_target = lt;
        }
      }
      if (it < burn) {
        window_accepts += accept ? 1 : 0;
        if (++window == 50) {
          const double rate = window_accepts / 50.0;
          scale *= std::exp(rate - config.target_acceptance);
          window = 0;
          window_accepts = 0;
        }
        continue;
      }
      ++proposed_after_burn;
      accepted_after_burn += accept ? 1 : 0;
      const int j = it - burn;
      if (kept < per_chain && j % thin == thin - 1) {
        out.samples.push_back(theta);
        ++kept;
      }
    }
    scale_sum += scale;
  }
  out.samples.resize(static_cast<std::size_t>(config.n_samples));
  out.acceptance_rate = proposed_after_burn > 0
                            ? static_cast<double>(accepted_after_burn) / static_cast<double>(proposed_after_burn)
                            : 0.0;
  out.proposal_scale = scale_sum / config.n_chains;
  if (out.acceptance_rate < 0.01) throw DegenerateChainError("MH acceptance below 0.01 after tuning");
  return out;
}

double log_density_at(std::span<const double> theta, const PosteriorSampleSet& samples) {
  if (samples.samples.empty()) throw std::invalid_argument("log_density_at needs samples");
  const std::size_t d = theta.size();
  const auto n = static_cast<double>(samples.samples.size());
  std::vector<double> h(d);
  for (std::size_t i = 0; i < d; ++i) {
    double mean = 0.0;
    for (const auto& s : samples.samples) mean += s[i];
    mean /= n;
    double var = 0.0;
    for (const auto& s : samples.samples) var += (s[i] - mean) * (s[i] - mean);
    const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    h[i] = std::max(sd, 1e-3) * std::pow(n, -1.0 / (static_cast<double>(d) + 4.0));
  }
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto kernel = [&](double u) { return inv_sqrt_2pi * std::exp(-0.5 * u * u); };
  double total = 0.0;
  for (const auto& s : samples.samples) {
    double prod = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double x = theta[i];
      const double v = s[i];
      const double k = kernel((x - v) / h[i]) + kernel((x + v) / h[i]) + kernel((x - (2.0 - v)) / h[i]);
      prod *= k / h[i];
    }
    total += prod;
  }
  return std::log(total / n);
}

}  // namespace amab
