#include "amab/human_policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "amab/beta_math.hpp"

namespace amab {
namespace {

std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL)); }

std::uint64_t combine(std::uint64_t h, double v) { return combine(h, std::bit_cast<std::uint64_t>(v)); }

void check_out(std::span<double> out, int n) {
  if (static_cast<int>(out.size()) != n) throw std::invalid_argument("distribution size mismatch");
}

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must be in [0, 1]");
}

struct TripleKey {
  std::uint64_t a, b, c;
  bool operator==(const TripleKey&) const = default;
};
struct TripleKeyHash {
  std::size_t operator()(const TripleKey& k) const {
    return static_cast<std::size_t>(mix64(k.a ^ mix64(k.b ^ mix64(k.c))));
  }
};

double cached_beta_quantile(double a, double b, double p) {
  thread_local std::unordered_map<TripleKey, double, TripleKeyHash> cache;
  const TripleKey key{std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b),
                      std::bit_cast<std::uint64_t>(p)};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  if (cache.size() > 500000) cache.clear();
  const double q = beta_quantile(a, b, p);
  cache.emplace(key, q);
  return q;
}

}  // namespace

// --- BeliefState -----------------------------------------------------------

BeliefState::BeliefState(const BetaPrior& prior) {
  for (const auto& a : prior.arms()) {
    alpha0_.push_back(a.alpha);
    beta0_.push_back(a.beta);
    known_.push_back(a.known_mean);
  }
  alpha_ = alpha0_;
  beta_ = beta0_;
}

double BeliefState::mean(Arm k) const {
  const auto i = static_cast<std::size_t>(k);
  if (known_[i]) return *known_[i];
  return alpha_[i] / (alpha_[i] + beta_[i]);
}

void BeliefState::observe(Arm k, int reward) {
  if (k < 0 || k >= n_arms()) throw std::out_of_range("BeliefState::observe: arm out of range");
  const auto i = static_cast<std::size_t>(k);
  if (known_[i]) return;
  if (reward != 0) {
    alpha_[i] += 1.0;
  } else {
    beta_[i] += 1.0;
  }
}

void BeliefState::reset() {
  alpha_ = alpha0_;
  beta_ = beta0_;
}

std::uint64_t BeliefState::fingerprint() const {
  std::uint64_t h = 0x51ed270b27d4f3a1ULL;
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    h = combine(h, alpha_[i]);
    h = combine(h, beta_[i]);
  }
  return h;
}

// --- HumanPolicy -----------------------------------------------------------

HumanPolicy::HumanPolicy(int n_arms) : n_arms_(n_arms) {
  if (n_arms < 2) throw std::invalid_argument("policy needs at least two arms");
}

void HumanPolicy::approximate_action_distribution(std::span<double> out) const {
  if (action_distribution(out)) return;
  // State-seeded, so the approximation is a deterministic function of state.
  RandomStream rng(mix64(state_fingerprint() ^ 0xa0761d6478bd642fULL));
  estimate_action_distribution(out, 4096, rng);
}

void HumanPolicy::estimate_action_distribution(std::span<double> out, int m,
                                               RandomStream& rng) const {
  check_out(out, n_arms_);
  if (action_distribution(out)) return;
  if (m < 1) throw std::invalid_argument("estimate_action_distribution: m must be >= 1");
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(suggest(rng))] += 1.0;
  for (auto& v : out) v /= m;
}

// --- distributions ---------------------------------------------------------

void argmax_distribution(std::span<const double> values, std::span<double> out) {
  if (values.size() != out.size() || values.empty()) {
    throw std::invalid_argument("argmax_distribution: size mismatch");
  }
  const double hi = *std::max_element(values.begin(), values.end());
  int ties = 0;
  for (double v : values) ties += v == hi ? 1 : 0;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] == hi ? 1.0 / ties : 0.0;
}

Arm sample_argmax(std::span<const double> values, RandomStream& rng) {
  const double hi = *std::max_element(values.begin(), values.end());
  int ties = 0;
  for (double v : values) ties += v == hi ? 1 : 0;
  int pick = ties == 1 ? 0 : rng.uniform_int(ties);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == hi && pick-- == 0) return static_cast<Arm>(i);
  }
  return 0;
}

Arm sample_categorical(std::span<const double> probs, RandomStream& rng) {
  double u = rng.uniform();
  Arm last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last = static_cast<Arm>(i);
    if (u < probs[i]) return last;
    u -= probs[i];
  }
  return last;
}

void epsilon_greedy_distribution(std::span<const double> means, double epsilon,
                                 std::span<double> out) {
  check_epsilon(epsilon);
  argmax_distribution(means, out);
  const double floor = epsilon / static_cast<double>(means.size());
  for (auto& v : out) v = (1.0 - epsilon) * v + floor;
}

void wsls_distribution(std::optional<Arm> last_arm, int last_reward, std::span<double> out) {
  const int n = static_cast<int>(out.size());
  if (n < 2) throw std::invalid_argument("wsls_distribution: need at least two arms");
  if (!last_arm) {
    std::fill(out.begin(), out.end(), 1.0 / n);
    return;
  }
  if (*last_arm < 0 || *last_arm >= n) throw std::out_of_range("wsls_distribution: arm out of range");
  if (last_reward != 0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(*last_arm)] = 1.0;
  } else {
    std::fill(out.begin(), out.end(), 1.0 / (n - 1));
    out[static_cast<std::size_t>(*last_arm)] = 0.0;
  }
}

Arm thompson_sample(const BeliefState& belief, int n_draws, RandomStream& rng) {
  if (n_draws < 0) throw std::invalid_argument("thompson_sample: n_draws must be >= 0");
  thread_local std::vector<double> values;
  values.assign(static_cast<std::size_t>(belief.n_arms()), 0.0);
  for (Arm k = 0; k < belief.n_arms(); ++k) {
    double v = 0.0;
    if (n_draws == 0 || belief.known(k)) {
      v = belief.mean(k);
    } else {
      for (int d = 0; d < n_draws; ++d) v += rng.beta(belief.alpha(k), belief.beta(k));
      v /= n_draws;
    }
    values[static_cast<std::size_t>(k)] = v;
  }
  return sample_argmax(values, rng);
}

double ucl_index(double alpha, double beta, int t, double k) {
  if (t < 1) throw std::invalid_argument("ucl_index: t must be >= 1");
  if (!(k > 0.0)) throw std::invalid_argument("ucl_index: K must be positive");
  double level = 1.0 - 1.0 / (k * static_cast<double>(t));
  level = std::clamp(level, 0.5, 1.0 - 1e-12);
  return cached_beta_quantile(alpha, beta, level);
}

void ucl_distribution(std::span<const double> indices, double tau, SoftmaxOrientation orientation,
                      std::span<double> out) {
  if (!(tau > 0.0)) throw std::invalid_argument("ucl_distribution: tau must be positive");
  softmax(indices, orientation == SoftmaxOrientation::kInverseTemperature ? tau : 1.0 / tau, out);
}

void epsilon_optimal_distribution(std::span<const double> theta, double epsilon,
                                  std::span<double> out) {
  check_epsilon(epsilon);
  if (theta.size() != out.size() || theta.empty()) {
    throw std::invalid_argument("epsilon_optimal_distribution: size mismatch");
  }
  // Lowest-index best arm, as in BanditInstance.
  std::size_t best = 0;
  for (std::size_t i = 1; i < theta.size(); ++i) {
    if (theta[i] > theta[best]) best = i;
  }
  const double floor = epsilon / static_cast<double>(theta.size());
  std::fill(out.begin(), out.end(), floor);
  out[best] += 1.0 - epsilon;
}

Arm communicative_suggestion(std::optional<int> last_reward, int n_arms, RandomStream& rng) {
  if (n_arms < 2) throw std::invalid_argument("communicative_suggestion: need two arms");
  if (!last_reward) return rng.uniform_int(n_arms);
  return *last_reward != 0 ? 1 : 0;
}

// --- EpsilonGreedy ---------------------------------------------------------

EpsilonGreedy::EpsilonGreedy(const BetaPrior& prior, double epsilon)
    : ClonableHumanPolicy(prior.n_arms()), epsilon_(epsilon) {
  check_epsilon(epsilon);
  for (const auto& a : prior.arms()) {
    prior_mean_.push_back(a.alpha / (a.alpha + a.beta));
    known_.push_back(a.known_mean);
  }
  reset();
}

void EpsilonGreedy::reset() {
  pulls_.assign(static_cast<std::size_t>(n_arms()), 0);
  successes_.assign(static_cast<std::size_t>(n_arms()), 0);
}

void EpsilonGreedy::observe(Arm executed, int reward) {
  if (executed < 0 || executed >= n_arms()) throw std::out_of_range("EpsilonGreedy: arm out of range");
  ++pulls_[static_cast<std::size_t>(executed)];
  successes_[static_cast<std::size_t>(executed)] += reward != 0 ? 1 : 0;
}

std::vector<double> EpsilonGreedy::hindsight_means() const {
  std::vector<double> m(static_cast<std::size_t>(n_arms()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (known_[i]) {
      m[i] = *known_[i];
    } else if (pulls_[i] == 0) {
      m[i] = prior_mean_[i];
    } else {
      m[i] = static_cast<double>(successes_[i]) / pulls_[i];
    }
  }
  return m;
}

bool EpsilonGreedy::action_distribution(std::span<double> out) const {
  check_out(out, n_arms());
  const auto means = hindsight_means();
  epsilon_greedy_distribution(means, epsilon_, out);
  // A disclosed arm that ties for the lead takes the whole greedy mass.
  const double hi = *std::max_element(means.begin(), means.end());
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (known_[i] && means[i] == hi) {
      const double floor = epsilon_ / static_cast<double>(means.size());
      std::fill(out.begin(), out.end(), floor);
      out[i] += 1.0 - epsilon_;
      break;
    }
  }
  return true;
}

Arm EpsilonGreedy::suggest(RandomStream& rng) const {
  if (rng.uniform() < epsilon_) return rng.uniform_int(n_arms());
  const auto means = hindsight_means();
  const double hi = *std::max_element(means.begin(), means.end());
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (known_[i] && means[i] == hi) return static_cast<Arm>(i);
  }
  return sample_argmax(means, rng);
}

std::uint64_t EpsilonGreedy::state_fingerprint() const {
  std::uint64_t h = 0x2d358dccaa6c78a5ULL;
  for (std::size_t i = 0; i < pulls_.size(); ++i) {
    h = combine(h, static_cast<std::uint64_t>(pulls_[i]));
    h = combine(h, static_cast<std::uint64_t>(successes_[i]));
  }
  return h;
}

// --- WinStayLoseShift ------------------------------------------------------

WinStayLoseShift::WinStayLoseShift(int n_arms) : ClonableHumanPolicy(n_arms) {}

void WinStayLoseShift::reset() {
  last_arm_.reset();
  last_reward_ = 0;
}

void WinStayLoseShift::observe(Arm executed, int reward) {
  if (executed < 0 || executed >= n_arms()) throw std::out_of_range("WSLS: arm out of range");
  last_arm_ = executed;
  last_reward_ = reward != 0 ? 1 : 0;
}

Arm WinStayLoseShift::suggest(RandomStream& rng) const {
  if (!last_arm_) return rng.uniform_int(n_arms());
  if (last_reward_ == 1) return *last_arm_;
  const Arm k = rng.uniform_int(n_arms() - 1);
  return k >= *last_arm_ ? k + 1 : k;
}

bool WinStayLoseShift::action_distribution(std::span<double> out) const {
  check_out(out, n_arms());
  wsls_distribution(last_arm_, last_reward_, out);
  return true;
}

std::uint64_t WinStayLoseShift::state_fingerprint() const {
  return combine(combine(0x8ebc6af09c88c6e3ULL, static_cast<std::uint64_t>(last_arm_.value_or(-1))),
                 static_cast<std::uint64_t>(last_reward_));
}

// --- ThompsonSampling ------------------------------------------------------

ThompsonSampling::ThompsonSampling(const BetaPrior& prior, int n_draws)
    : ClonableHumanPolicy(prior.n_arms()), belief_(prior), n_draws_(n_draws) {
  if (n_draws < 0) throw std::invalid_argument("thompson: n_draws must be >= 0 (0 = infinite)");
}

bool ThompsonSampling::has_known_arm() const {
  for (Arm k = 0; k < n_arms(); ++k) {
    if (belief_.known(k)) return true;
  }
  return false;
}

Arm ThompsonSampling::suggest(RandomStream& rng) const { return thompson_sample(belief_, n_draws_, rng); }

bool ThompsonSampling::action_distribution(std::span<double> out) const {
  check_out(out, n_arms());
  if (n_draws_ == 0) {
    std::vector<double> means(static_cast<std::size_t>(n_arms()));
    for (Arm k = 0; k < n_arms(); ++k) means[static_cast<std::size_t>(k)] = belief_.mean(k);
    argmax_distribution(means, out);
    return true;
  }
  if (n_draws_ == 1 && !has_known_arm()) {
    beta_argmax_probabilities(belief_.alphas(), belief_.betas(), out);
    return true;
  }
  return false;
}

void ThompsonSampling::approximate_action_distribution(std::span<double> out) const {
  if (action_distribution(out)) return;
  if (!has_known_arm()) {
    beta_mean_argmax_probabilities(belief_.alphas(), belief_.betas(), n_draws_, out);
    return;
  }
  HumanPolicy::approximate_action_distribution(out);
}

// --- UpperCredibleLimit ----------------------------------------------------

UpperCredibleLimit::UpperCredibleLimit(const BetaPrior& prior, double k, double tau,
                                       SoftmaxOrientation orientation)
    : ClonableHumanPolicy(prior.n_arms()), belief_(prior), k_(k), tau_(tau), orientation_(orientation) {
  if (!(k > 0.0)) throw std::invalid_argument("ucl: K must be positive");
  if (!(tau > 0.0)) throw std::invalid_argument("ucl: tau must be positive");
}

void UpperCredibleLimit::reset() {
  belief_.reset();
  t_ = 1;
}

void UpperCredibleLimit::observe(Arm executed, int reward) {
  belief_.observe(executed, reward);
  ++t_;
}

std::vector<double> UpperCredibleLimit::indices() const {
  std::vector<double> q(static_cast<std::size_t>(n_arms()));
  for (Arm k = 0; k < n_arms(); ++k) {
    q[static_cast<std::size_t>(k)] =
        belief_.known(k) ? belief_.mean(k) : ucl_index(belief_.alpha(k), belief_.beta(k), t_, k_);
  }
  return q;
}

bool UpperCredibleLimit::action_distribution(std::span<double> out) const {
  check_out(out, n_arms());
  const auto q = indices();
  ucl_distribution(q, tau_, orientation_, out);
  return true;
}

Arm UpperCredibleLimit::suggest(RandomStream& rng) const {
  std::vector<double> p(static_cast<std::size_t>(n_arms()));
  action_distribution(p);
  return sample_categorical(p, rng);
}

std::uint64_t UpperCredibleLimit::state_fingerprint() const {
  return combine(belief_.fingerprint(), static_cast<std::uint64_t>(t_));
}

// --- GittinsIndexPolicy ----------------------------------------------------

GittinsIndexPolicy::GittinsIndexPolicy(const BetaPrior& prior, std::shared_ptr<const GittinsTable> table)
    : ClonableHumanPolicy(prior.n_arms()), belief_(prior), table_(std::move(table)) {
  if (!table_) throw std::invalid_argument("gittins policy needs a table");
}

std::vector<double> GittinsIndexPolicy::indices() const {
  std::vector<double> g(static_cast<std::size_t>(n_arms()));
  for (Arm k = 0; k < n_arms(); ++k) {
    g[static_cast<std::size_t>(k)] =
        belief_.known(k) ? belief_.mean(k) : table_->index(belief_.alpha(k), belief_.beta(k));
  }
  return g;
}

Arm GittinsIndexPolicy::suggest(RandomStream& rng) const { return sample_argmax(indices(), rng); }

bool GittinsIndexPolicy::action_distribution(std::span<double> out) const {
  check_out(out, n_arms());
  argmax_distribution(indices(), out);
  return true;
}

// --- EpsilonOptimal --------------------------------------------------------

EpsilonOptimal::EpsilonOptimal(int n_arms, double epsilon) : ClonableHumanPolicy(n_arms), epsilon_(epsilon) {
  check_epsilon(epsilon);
}

void EpsilonOptimal::bind_reward_parameters(std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != n_arms()) {
    throw std::invalid_argument("epsilon_optimal: theta size mismatch");
  }
  theta_.assign(theta.begin(), theta.end());
}

bool EpsilonOptimal::action_distribution(std::span<double> out) const {
  check_out(out, n_arms());
  if (theta_.empty()) throw std::logic_error("epsilon_optimal: reward parameters not bound");
  epsilon_optimal_distribution(theta_, epsilon_, out);
  return true;
}

Arm EpsilonOptimal::suggest(RandomStream& rng) const {
  if (theta_.empty()) throw std::logic_error("epsilon_optimal: reward parameters not bound");
  if (rng.uniform() < epsilon_) return rng.uniform_int(n_arms());
  return static_cast<Arm>(std::max_element(theta_.begin(), theta_.end()) - theta_.begin());
}

std::uint64_t EpsilonOptimal::state_fingerprint() const {
  std::uint64_t h = 0x4cf5ad432745937fULL;
  for (double v : theta_) h = combine(h, v);
  return h;
}

// --- Communicative ---------------------------------------------------------

Communicative::Communicative(int n_arms) : ClonableHumanPolicy(n_arms) {}

Arm Communicative::suggest(RandomStream& rng) const {
  return communicative_suggestion(last_reward_, n_arms(), rng);
}

bool Communicative::action_distribution(std::span<double> out) const {
  check_out(out, n_arms());
  if (!last_reward_) {
    std::fill(out.begin(), out.end(), 1.0 / n_arms());
  } else {
    std::fill(out.begin(), out.end(), 0.0);
    out[*last_reward_ != 0 ? 1 : 0] = 1.0;
  }
  return true;
}

std::uint64_t Communicative::state_fingerprint() const {
  return combine(0x1b873593ULL, static_cast<std::uint64_t>(last_reward_.value_or(-1)));
}

// --- ConstantHuman ---------------------------------------------------------

ConstantHuman::ConstantHuman(int n_arms, Arm arm) : ClonableHumanPolicy(n_arms), arm_(arm) {
  if (arm < 0 || arm >= n_arms) throw std::out_of_range("constant human: arm out of range");
}

bool ConstantHuman::action_distribution(std::span<double> out) const {
  check_out(out, n_arms());
  std::fill(out.begin(), out.end(), 0.0);
  out[static_cast<std::size_t>(arm_)] = 1.0;
  return true;
}

}  // namespace amab
