#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "amab/beta_math.hpp"
#include "amab/gittins.hpp"
#include "amab/human_policy.hpp"

using namespace amab;

namespace {

std::vector<double> dist_of(void (*f)(std::span<const double>, double, std::span<double>), std::vector<double> v,
                            double p) {
  std::vector<double> out(v.size());
  f(v, p, out);
  return out;
}

void check_vec(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

// Beta(a, b) CDF for integer parameters through the binomial identity
// I_x(a, b) = P(Binomial(a + b - 1, x) >= a).
double binomial_beta_cdf(double x, int a, int b) {
  const int n = a + b - 1;
  double s = 0.0;
  for (int j = a; j <= n; ++j) s += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0)) *
                                    std::pow(x, j) * std::pow(1.0 - x, n - j);
  return s;
}

double bisect_quantile(int a, int b, double p) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (binomial_beta_cdf(mid, a, b) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Gittins index by the restart-in-state formulation: the value of the
// problem where one may at any time jump back to (a0, b0), times (1 - gamma).
// Backward induction over the Beta tree to `depth`, iterated to a fixed point
// in the restart value.
double restart_gittins(int a0, int b0, double gamma, int depth) {
  double v0 = 0.5 / (1.0 - gamma);
  std::vector<double> next(static_cast<std::size_t>(depth) + 2), cur(next.size());
  for (int iter = 0; iter < 5000; ++iter) {
    for (int s = 0; s <= depth; ++s) {
      const double mean = (a0 + s) / static_cast<double>(a0 + b0 + depth);
      next[static_cast<std::size_t>(s)] = std::max(mean / (1.0 - gamma), v0);
    }
    double root = 0.0;
    for (int d = depth - 1; d >= 0; --d) {
      for (int s = 0; s <= d; ++s) {
        const double p = (a0 + s) / static_cast<double>(a0 + b0 + d);
        const double cont = p * (1.0 + gamma * next[static_cast<std::size_t>(s) + 1]) +
                            (1.0 - p) * gamma * next[static_cast<std::size_t>(s)];
        cur[static_cast<std::size_t>(s)] = d == 0 ? cont : std::max(cont, v0);
      }
      std::swap(cur, next);
      if (d == 0) root = next[0];
    }
    if (std::abs(root - v0) < 1e-13) break;
    v0 = root;
  }
  return (1.0 - gamma) * v0;
}

// Total variation between 1e5 suggestions and the exact distribution.
double sampler_tv(const HumanPolicy& h, std::uint64_t seed) {
  std::vector<double> exact(static_cast<std::size_t>(h.n_arms()));
  REQUIRE(h.action_distribution(exact));
  std::vector<double> freq(exact.size(), 0.0);
  RandomStream rng(seed);
  const int n = 100000;
  for (int i = 0; i < n; ++i) freq[static_cast<std::size_t>(h.suggest(rng))] += 1.0 / n;
  double tv = 0.0;
  for (std::size_t k = 0; k < exact.size(); ++k) tv += 0.5 * std::abs(freq[k] - exact[k]);
  return tv;
}

}  // namespace

TEST_SUITE("human_policies") {

TEST_CASE("epsilon-greedy distribution") {
  check_vec(dist_of(epsilon_greedy_distribution, {0.9, 0.2, 0.2, 0.2}, 0.1), {0.925, 0.025, 0.025, 0.025}, 1e-12);
  check_vec(dist_of(epsilon_greedy_distribution, {0.6, 0.6, 0.1, 0.1}, 0.0), {0.5, 0.5, 0, 0}, 1e-12);
  EpsilonGreedy eg(BetaPrior::uniform(4), 0.1);
  std::vector<double> d(4);
  REQUIRE(eg.action_distribution(d));
  check_vec(d, {0.25, 0.25, 0.25, 0.25}, 1e-12);
  // a failure drops the arm below the unpulled prior mean of 0.5
  eg.observe(0, 0);
  REQUIRE(eg.action_distribution(d));
  check_vec(d, {0.025, 0.025 + 0.9 / 3, 0.025 + 0.9 / 3, 0.025 + 0.9 / 3}, 1e-12);
}

TEST_CASE("WSLS distribution") {
  std::vector<double> d(4);
  wsls_distribution(2, 1, d);
  check_vec(d, {0, 0, 1, 0}, 0);
  wsls_distribution(2, 0, d);
  check_vec(d, {1.0 / 3, 1.0 / 3, 0, 1.0 / 3}, 1e-15);
  wsls_distribution(std::nullopt, 0, d);
  check_vec(d, {0.25, 0.25, 0.25, 0.25}, 0);

  WinStayLoseShift w(4);
  w.observe(1, 1);
  RandomStream rng(1);
  for (int i = 0; i < 100; ++i) CHECK(w.suggest(rng) == 1);
}

TEST_CASE("Thompson sampling with one draw is symmetric under a uniform prior") {
  ThompsonSampling ts(BetaPrior::uniform(4), 1);
  RandomStream rng(4);
  std::vector<long> c(4, 0);
  for (int i = 0; i < 100000; ++i) ++c[static_cast<std::size_t>(ts.suggest(rng))];
  for (long v : c) CHECK(std::abs(v / 1e5 - 0.25) < 0.01);
}

TEST_CASE("Thompson argmax probability against brute-force sampling") {
  // Beta(50, 1) vs Beta(1, 50)
  const std::vector<double> a{50, 1}, b{1, 50};
  std::vector<double> p(2);
  beta_argmax_probabilities(a, b, p);
  CHECK(p[0] > 0.999);
  std::mt19937_64 gen(7);
  std::gamma_distribution<double> g50(50.0), g1(1.0);
  long wins = 0;
  const long n = 1000000;
  for (long i = 0; i < n; ++i) {
    const double x0 = g50(gen), y0 = g1(gen);
    const double x1 = g1(gen), y1 = g50(gen);
    wins += x0 / (x0 + y0) > x1 / (x1 + y1);
  }
  CHECK(std::abs(p[0] - static_cast<double>(wins) / n) < 5e-5);

  // asymmetric 4-arm state
  const std::vector<double> a4{3, 1, 2, 5}, b4{2, 1, 4, 6};
  std::vector<double> p4(4);
  beta_argmax_probabilities(a4, b4, p4);
  std::vector<double> mc(4, 0.0);
  const int m = 400000;
  for (int i = 0; i < m; ++i) {
    double best = -1;
    int arg = 0;
    for (int k = 0; k < 4; ++k) {
      std::gamma_distribution<double> ga(a4[static_cast<std::size_t>(k)]), gb(b4[static_cast<std::size_t>(k)]);
      const double x = ga(gen), y = gb(gen);
      if (x / (x + y) > best) {
        best = x / (x + y);
        arg = k;
      }
    }
    mc[static_cast<std::size_t>(arg)] += 1.0 / m;
  }
  check_vec(p4, mc, 0.004);
}

TEST_CASE("Thompson sampling with infinite draws is the argmax of posterior means") {
  ThompsonSampling ts(BetaPrior::uniform(4), 0);
  ts.observe(2, 1);
  ts.observe(0, 0);
  RandomStream rng(5);
  for (int i = 0; i < 50; ++i) CHECK(ts.suggest(rng) == 2);
}

TEST_CASE("moment-matched mean-of-draws probabilities are close to simulation") {
  const std::vector<double> a{3, 1, 2, 5}, b{2, 1, 4, 6};
  for (int n : {2, 3, 10}) {
    std::vector<double> p(4);
    beta_mean_argmax_probabilities(a, b, n, p);
    std::mt19937_64 gen(static_cast<std::uint64_t>(n));
    std::vector<double> mc(4, 0.0);
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
      double best = -1;
      int arg = 0;
      for (int k = 0; k < 4; ++k) {
        std::gamma_distribution<double> ga(a[static_cast<std::size_t>(k)]), gb(b[static_cast<std::size_t>(k)]);
        double s = 0;
        for (int j = 0; j < n; ++j) {
          const double x = ga(gen), y = gb(gen);
          s += x / (x + y);
        }
        if (s > best) {
          best = s;
          arg = k;
        }
      }
      mc[static_cast<std::size_t>(arg)] += 1.0 / m;
    }
    // an approximation, not exact
    check_vec(p, mc, 0.03);
  }
}

TEST_CASE("UCL index") {
  CHECK(ucl_index(1, 1, 1, 4) == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(ucl_index(1, 1, 25, 4) == doctest::Approx(0.99).epsilon(1e-10));
  CHECK(std::abs(ucl_index(3, 2, 1, 4) - bisect_quantile(3, 2, 0.75)) < 1e-8);
  CHECK(std::abs(ucl_index(4, 7, 6, 4) - bisect_quantile(4, 7, 1.0 - 1.0 / 24.0)) < 1e-8);
  CHECK(std::abs(beta_cdf(0.3, 4, 7) - binomial_beta_cdf(0.3, 4, 7)) < 1e-12);
}

TEST_CASE("UCL softmax") {
  std::vector<double> d(4);
  ucl_distribution(std::vector<double>{0.3, 0.3, 0.3, 0.3}, 4.0, SoftmaxOrientation::kInverseTemperature, d);
  check_vec(d, {0.25, 0.25, 0.25, 0.25}, 1e-12);
  ucl_distribution(std::vector<double>{1, 0, 0, 0}, 1e3, SoftmaxOrientation::kInverseTemperature, d);
  CHECK(d[0] > 1.0 - 1e-12);
  ucl_distribution(std::vector<double>{0.9, 0.5, 0.5, 0.5}, 4.0, SoftmaxOrientation::kInverseTemperature, d);
  const double top = std::exp(4 * 0.9), rest = std::exp(4 * 0.5);
  check_vec(d, {top / (top + 3 * rest), rest / (top + 3 * rest), rest / (top + 3 * rest), rest / (top + 3 * rest)},
            1e-12);
  CHECK(std::abs(d[0] - 0.623) < 1e-3);
  CHECK(std::abs(d[1] - 0.1257) < 1e-3);
  ucl_distribution(std::vector<double>{0.9, 0.5, 0.5, 0.5}, 0.25, SoftmaxOrientation::kTemperature, d);
  CHECK(std::abs(d[0] - 0.623) < 1e-3);
}

TEST_CASE("Gittins index matches the restart-formulation DP") {
  const double gi = gittins_index(1, 1, 0.9, 1e-9);
  CHECK((gi > 0.5 && gi < 1.0));
  const double oracle = restart_gittins(1, 1, 0.9, 400);
  CHECK(std::abs(gi - oracle) < 1e-4);
  CHECK(std::abs(oracle - 0.7029) < 5e-4);
  CHECK(gittins_index(2, 1, 0.9, 1e-9) > gi);
  for (auto [a, b] : {std::pair{2, 1}, std::pair{1, 3}, std::pair{5, 4}}) {
    CHECK(std::abs(gittins_index(a, b, 0.9, 1e-9) - restart_gittins(a, b, 0.9, 400)) < 1e-4);
  }
  const auto table = shared_gittins_table(0.9);
  CHECK(std::abs(table->index(1, 1) - oracle) < 1e-4);
}

TEST_CASE("Gittins table is monotone in successes and failures") {
  const auto table = shared_gittins_table(0.9);
  long violations = 0;
  for (int n = 2; n < table->cap(); ++n) {
    for (int a = 1; a < n; ++a) {
      const int b = n - a;
      if (table->contains(a + 1, b)) violations += !(table->index(a + 1, b) > table->index(a, b));
      if (table->contains(a, b + 1)) violations += !(table->index(a, b + 1) < table->index(a, b));
      violations += !(table->index(a, b) >= static_cast<double>(a) / n);
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("epsilon-optimal distribution") {
  std::vector<double> d(4);
  epsilon_optimal_distribution(std::vector<double>{0.8, 0.5, 0.5, 0.5}, 0.1, d);
  check_vec(d, {0.925, 0.025, 0.025, 0.025}, 1e-12);
  epsilon_optimal_distribution(std::vector<double>{0.8, 0.5, 0.5, 0.5}, 1.0, d);
  check_vec(d, {0.25, 0.25, 0.25, 0.25}, 1e-12);
  epsilon_optimal_distribution(std::vector<double>{0.2, 0.5, 0.9, 0.5}, 0.0, d);
  check_vec(d, {0, 0, 1, 0}, 0);

  EpsilonOptimal e(4, 0.1);
  e.bind_reward_parameters(std::vector<double>{0.1, 0.7, 0.2, 0.3});
  std::vector<double> before(4), after(4);
  REQUIRE(e.action_distribution(before));
  for (int i = 0; i < 10; ++i) e.observe(i % 4, i % 2);
  REQUIRE(e.action_distribution(after));
  CHECK(before == after);
}

TEST_CASE("communicative human") {
  std::vector<double> d(4);
  Communicative c(4);
  REQUIRE(c.action_distribution(d));
  check_vec(d, {0.25, 0.25, 0.25, 0.25}, 0);
  c.observe(3, 1);
  REQUIRE(c.action_distribution(d));
  check_vec(d, {0, 1, 0, 0}, 0);
  c.observe(1, 0);
  REQUIRE(c.action_distribution(d));
  check_vec(d, {1, 0, 0, 0}, 0);
}

TEST_CASE("belief bookkeeping equals prior plus counts") {
  RandomStream rng(12);
  BeliefState b(BetaPrior::uniform(4, 2.0, 3.0));
  std::vector<int> s(4, 0), f(4, 0);
  for (int i = 0; i < 500; ++i) {
    const Arm k = rng.uniform_int(4);
    const int r = rng.bernoulli(0.4) ? 1 : 0;
    b.observe(k, r);
    (r ? s : f)[static_cast<std::size_t>(k)]++;
  }
  for (Arm k = 0; k < 4; ++k) {
    CHECK(b.alpha(k) == 2.0 + s[static_cast<std::size_t>(k)]);
    CHECK(b.beta(k) == 3.0 + f[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("suggestions follow the exact action distribution") {
  const auto prior = BetaPrior::uniform(4);
  std::vector<std::unique_ptr<HumanPolicy>> policies;
  policies.push_back(std::make_unique<EpsilonGreedy>(prior, 0.1));
  policies.push_back(std::make_unique<WinStayLoseShift>(4));
  policies.push_back(std::make_unique<ThompsonSampling>(prior, 1));
  policies.push_back(std::make_unique<ThompsonSampling>(prior, 0));
  policies.push_back(std::make_unique<UpperCredibleLimit>(prior));
  policies.push_back(std::make_unique<GittinsIndexPolicy>(prior, shared_gittins_table(0.9)));
  policies.push_back(std::make_unique<Communicative>(4));
  policies.push_back(std::make_unique<ConstantHuman>(4, 2));
  auto eo = std::make_unique<EpsilonOptimal>(4, 0.2);
  eo->bind_reward_parameters(std::vector<double>{0.1, 0.9, 0.3, 0.4});
  policies.push_back(std::move(eo));
  const std::vector<std::pair<Arm, int>> history{{0, 1}, {0, 0}, {1, 0}, {2, 1}, {3, 0}, {2, 0}};
  std::uint64_t seed = 1;
  for (auto& p : policies) {
    CAPTURE(p->name());
    CHECK(sampler_tv(*p, seed++) < 0.01);
    for (auto [a, r] : history) p->observe(a, r);
    CHECK(sampler_tv(*p, seed++) < 0.01);
  }
}

TEST_CASE("clones evolve independently and fingerprints track state") {
  ThompsonSampling ts(BetaPrior::uniform(4), 1);
  auto c = ts.clone();
  CHECK(c->state_fingerprint() == ts.state_fingerprint());
  c->observe(1, 1);
  CHECK(c->state_fingerprint() != ts.state_fingerprint());
  ts.observe(1, 1);
  CHECK(c->state_fingerprint() == ts.state_fingerprint());
}

}
