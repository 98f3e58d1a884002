// Acceptance gate: one PASS/FAIL line per criterion, at full size.
// Usage: acceptance <path to unit_tests> [--threads N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "amab/experiments.hpp"

using namespace amab;
using clk = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSeed = 20190311;
int g_threads = 1;
int g_failed = 0;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmtd(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

void criterion(const std::string& name, double budget_s, const std::function<Verdict()>& fn) {
  const auto t0 = clk::now();
  Verdict v;
  try {
    v = fn();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(clk::now() - t0).count();
  const bool in_time = budget_s <= 0 || s <= budget_s;
  const bool pass = v.pass && in_time;
  if (!pass) ++g_failed;
  std::printf("%s %s: %s [%.1fs%s]\n", pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), s,
              in_time ? "" : fmtd(" > budget %.0fs", budget_s).c_str());
  std::fflush(stdout);
}

ExperimentConfig teleop(const PolicySpec& human, const PolicySpec& robot, long episodes) {
  ExperimentConfig c;
  c.name = "acceptance";
  c.seed = kSeed;
  c.threads = g_threads;
  c.human = human;
  c.robot = robot;
  c.n_episodes = episodes;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::string unit_tests;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--threads" && i + 1 < argc) {
      g_threads = std::atoi(argv[++i]);
    } else {
      unit_tests = a;
    }
  }

  criterion("Prop. 5 exactness", 30, [] {
    const auto r = run_prop5_exactness(10000, kSeed);
    return Verdict{r.mismatched_seeds == 0,
                   fmtd("%.0f seeds, %.0f mismatched, max mismatch %.0f", r.seeds, r.mismatched_seeds, r.max_mismatch)};
  });

  criterion("Prop. 5 magnitude", 120, [] {
    const auto r = run_prop5_magnitude(100000, kSeed, g_threads);
    const bool ok = std::abs(r.difference.mean) <= 2.0 * r.difference.se;
    return Verdict{ok, fmtd("assisted WSLS %.3f, solo GI %.3f, paired difference %.4f (se %.4f)", r.assisted.mean,
                            r.solo.mean, r.difference.mean, r.difference.se)};
  });

  criterion("Prop. 1", 120, [] {
    const auto r = run_prop1(100000, kSeed, g_threads);
    const bool ok = r.regret_500 <= r.bound && r.regret_500 - r.regret_250 < 0.05;
    return Verdict{ok, fmtd("regret(250) %.4f, regret(500) %.4f, bound %.4f", r.regret_250, r.regret_500, r.bound)};
  });

  criterion("Prop. 4", 120, [] {
    const auto r = run_prop4(10000, 2000, 64, kSeed, g_threads);
    const bool ok = r.most_frequent_late >= 0.9 * r.most_frequent_early && r.belief_late < 0.5 * r.belief_early;
    return Verdict{ok, fmtd("most_frequent per-round %.4f -> %.4f; belief %.4f -> %.4f", r.most_frequent_early,
                            r.most_frequent_late, r.belief_early, r.belief_late)};
  });

  criterion("Prop. 2", 120, [] {
    const auto r = run_prop2(10000, kSeed, g_threads);
    const bool ok = r.per_round_2000 < 0.5 * r.per_round_500;
    return Verdict{ok, fmtd("per-round regret T=500 %.5f, T=1000 %.5f, T=2000 %.5f (ratio %.3f)", r.per_round_500,
                            r.per_round_1000, r.per_round_2000, r.per_round_2000 / r.per_round_500)};
  });

  criterion("Prop. 6 / Fano", 300, [] {
    const auto rows = run_fano_check(100000, kSeed, g_threads);
    int bad = 0;
    double worst = 1e9;
    for (const auto& r : rows) {
      bad += !r.holds;
      worst = std::min(worst, r.estimate.mi.bits - r.lower_bound + 3.0 * r.estimate.mi.se);
    }
    return Verdict{bad == 0, fmtd("%.0f pairs, %.0f violations, smallest slack %.3f bits", static_cast<double>(rows.size()),
                                  bad, worst)};
  });

  criterion("Table I direction", 900, [] {
    Table1Options o;
    o.instances = 200;
    o.seed = kSeed;
    o.threads = g_threads;
    const auto rows = run_table1(o);
    bool ok = true;
    std::string detail;
    std::vector<double> correct;
    for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
      const double p = paired_t_test_greater(rows[i].values, rows[i + 1].values);
      ok = ok && rows[i].log_density.mean > rows[i + 1].log_density.mean && p < 0.01;
      correct.push_back(rows[i].log_density.mean);
      detail += rows[i].actual.name + fmtd(" %.3f/%.3f p=%.1e; ", rows[i].log_density.mean,
                                           rows[i + 1].log_density.mean, p);
    }
    // learners: epsilon_greedy, wsls, thompson, ucl, gittins
    const bool order = std::min(correct[1], correct[4]) > std::max(correct[0], correct[2]);
    detail += order ? "WSLS, GI above TS, eps-greedy" : "ordering WSLS, GI > TS, eps-greedy violated";
    return Verdict{ok && order, detail};
  });

  criterion("Fig. 3/5 direction", 1800, [] {
    const std::vector<PolicySpec> humans = {{"epsilon_greedy", {{"epsilon", 0.1}}},
                                            {"wsls", nlohmann::json::object()},
                                            {"thompson", {{"particles", 1}}},
                                            {"ucl", nlohmann::json::object()}};
    bool ok = true;
    std::string detail;
    for (const auto& h : humans) {
      const auto c = compare_to_solo(teleop(h, {"belief", belief_robot_params(512)}, 10000));
      const bool lowers = c.improvement.mean > 3.0 * c.improvement.se;
      ok = ok && lowers;
      detail += h.name + fmtd(" belief %.3f vs solo %.3f (gain %.3f, se %.3f); ", c.assisted.mean_regret,
                              c.solo.mean_regret, c.improvement.mean, c.improvement.se);
    }
    for (std::size_t i = 0; i < 2; ++i) {
      const auto c = compare_to_solo(teleop(humans[i], {"most_frequent", nlohmann::json::object()}, 10000));
      const bool lowers = c.improvement.mean > 3.0 * c.improvement.se;
      ok = ok && !lowers;
      detail += humans[i].name + fmtd(" most_frequent %.3f vs solo %.3f; ", c.assisted.mean_regret, c.solo.mean_regret);
    }
    return Verdict{ok, detail};
  });

  criterion("Fig. 4 correlation", 0, [] {
    const auto rows = run_fig4(20000, 10000, 512, kSeed, g_threads);
    std::vector<double> x, y;
    for (const auto& r : rows) {
      x.push_back(r.mi.bits);
      y.push_back(r.assisted_regret.mean);
    }
    const double r = pearson_correlation(x, y);
    return Verdict{r < -0.5, fmtd("r = %.3f over %.0f variants", r, static_cast<double>(rows.size()))};
  });

  criterion("Unit/property suites", 0, [&unit_tests] {
    if (unit_tests.empty()) return Verdict{false, "unit test binary path not given"};
    const std::string cmd = "\"" + unit_tests + "\" --minimal";
    const int rc = std::system(cmd.c_str());
    return Verdict{rc == 0, rc == 0 ? "all suites green" : fmtd("unit tests exited with status %.0f", rc)};
  });

  std::printf("%d criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
