#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "amab/bandit.hpp"
#include "amab/random.hpp"

using namespace amab;

TEST_SUITE("bandit_core") {

TEST_CASE("uniform prior instances lie in the unit cube and report their best mean") {
  const SeedTree tree(11);
  for (std::uint64_t e = 0; e < 200; ++e) {
    RandomStream rng = tree.stream(0, e, StreamRole::kInstance);
    const auto inst = sample_instance(BetaPrior::uniform(4), rng);
    const auto th = inst.theta();
    for (double v : th) CHECK((v >= 0.0 && v <= 1.0));
    CHECK(inst.best_mean() == *std::max_element(th.begin(), th.end()));
    CHECK(inst.mean(inst.best_arm()) == inst.best_mean());
  }
}

TEST_CASE("a sharply peaked prior puts every arm near 1") {
  RandomStream rng(3);
  const auto prior = BetaPrior::uniform(4, 1e9, 1.0);
  long far = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto inst = sample_instance(prior, rng);
    for (double v : inst.theta()) far += std::abs(v - 1.0) > 1e-3;
  }
  CHECK(far <= 10);
}

TEST_CASE("identical seed paths give bit-identical instances") {
  const SeedTree a(99), b(99);
  RandomStream ra = a.stream("x", 5, StreamRole::kInstance);
  RandomStream rb = b.stream("x", 5, StreamRole::kInstance);
  const auto ia = sample_instance(BetaPrior::uniform(4), ra);
  const auto ib = sample_instance(BetaPrior::uniform(4), rb);
  for (int k = 0; k < 4; ++k) CHECK(std::bit_cast<std::uint64_t>(ia.mean(k)) == std::bit_cast<std::uint64_t>(ib.mean(k)));
}

TEST_CASE("split streams do not depend on the parent's position") {
  RandomStream p(5);
  const auto c1 = p.split(3);
  p();
  p();
  auto c2 = p.split(3);
  auto c1m = c1;
  for (int i = 0; i < 10; ++i) CHECK(c1m() == c2());
}

TEST_CASE("pull is deterministic at the extremes") {
  RandomStream rng(1);
  const BanditInstance inst({1.0, 0.0});
  for (int i = 0; i < 1000; ++i) {
    CHECK(pull(inst, 0, rng) == 1);
    CHECK(pull(inst, 1, rng) == 0);
  }
  CHECK_THROWS(pull(inst, 2, rng));
}

TEST_CASE("pull frequency matches theta") {
  RandomStream rng(2);
  const BanditInstance inst({0.8, 0.5});
  long s = 0;
  for (int i = 0; i < 100000; ++i) s += pull(inst, 0, rng);
  CHECK(std::abs(s / 1e5 - 0.8) < 0.005);
}

TEST_CASE("pull consumes exactly one draw") {
  RandomStream a(8), b(8);
  pull(BanditInstance({0.3, 0.7}), 1, a);
  b.uniform();
  CHECK(a.counter() == b.counter());
}

TEST_CASE("regret examples") {
  const BanditInstance inst({0.8, 0.5, 0.5, 0.5});
  CHECK(regret_of(inst, std::vector<Arm>(50, 0)) == 0.0);
  CHECK(regret_of(inst, std::vector<Arm>(10, 1)) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("regret equals recomputation from pull counts, and is additive") {
  RandomStream rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = sample_instance(BetaPrior::uniform(4), rng);
    std::vector<Arm> arms(50);
    for (auto& a : arms) a = rng.uniform_int(4);
    // brute force: gap per arm times how often it was pulled
    std::vector<int> counts(4, 0);
    for (Arm a : arms) ++counts[static_cast<std::size_t>(a)];
    double oracle = 0.0;
    for (int k = 0; k < 4; ++k) oracle += counts[static_cast<std::size_t>(k)] * (inst.best_mean() - inst.mean(k));
    CHECK(regret_of(inst, arms) == doctest::Approx(oracle).epsilon(1e-12));

    RegretLedger ledger(inst);
    for (Arm a : arms) ledger.record(a);
    CHECK(ledger.cumulative_regret() == doctest::Approx(ledger.recomputed_regret()).epsilon(1e-12));
    CHECK(ledger.rounds() == 50);

    const std::span<const Arm> all(arms);
    const double split = regret_of(inst, all.first(17)) + regret_of(inst, all.subspan(17));
    CHECK(std::abs(split - regret_of(inst, arms)) < 1e-9);
    CHECK(regret_of(inst, arms) <= 50.0);
  }
}

TEST_CASE("empirical frequencies") {
  const auto f = empirical_frequencies(std::vector<Arm>{0, 0, 1, 2}, 4);
  CHECK(f == std::vector<double>{0.5, 0.25, 0.25, 0.0});
  CHECK(empirical_frequencies(std::vector<Arm>(7, 3), 4) == std::vector<double>{0, 0, 0, 1});
  RandomStream rng(4);
  std::vector<Arm> arms(37);
  for (auto& a : arms) a = rng.uniform_int(4);
  const auto g = empirical_frequencies(arms, 4);
  CHECK(std::abs(std::accumulate(g.begin(), g.end(), 0.0) - 1.0) < 1e-12);
}

TEST_CASE("beta sampler moments agree with a std::gamma based sampler") {
  // independent route: <random>'s gamma_distribution
  std::mt19937_64 gen(123);
  std::gamma_distribution<double> ga(2.5, 1.0), gb(4.0, 1.0);
  RandomStream rng(9);
  double m1 = 0, m2 = 0, s1 = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.beta(2.5, 4.0);
    const double a = ga(gen), b = gb(gen);
    const double y = a / (a + b);
    m1 += x;
    s1 += x * x;
    m2 += y;
    s2 += y * y;
  }
  m1 /= n;
  m2 /= n;
  CHECK(std::abs(m1 - m2) < 0.003);
  CHECK(std::abs(s1 / n - m1 * m1 - (s2 / n - m2 * m2)) < 0.002);
}

TEST_CASE("uniform_int is unbiased") {
  RandomStream rng(10);
  std::vector<long> c(3, 0);
  for (int i = 0; i < 300000; ++i) ++c[static_cast<std::size_t>(rng.uniform_int(3))];
  for (long v : c) CHECK(std::abs(v / 300000.0 - 1.0 / 3.0) < 0.004);
}

}
