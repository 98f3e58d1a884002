#include "amab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "amab/csv.hpp"
#include "amab/episode.hpp"

namespace amab {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

PolicySpec spec(std::string name, json params = json::object()) { return {std::move(name), std::move(params)}; }

ExperimentConfig base_config(std::uint64_t seed, int threads) {
  ExperimentConfig c;
  c.seed = seed;
  c.threads = threads;
  return c;
}

ExperimentConfig solo_of(ExperimentConfig c) {
  c.mode = InteractionMode::kSolo;
  c.robot = spec("none");
  c.assumed_human.reset();
  return c;
}

MeanSe paired_difference(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  d.reserve(a.size());
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (!std::isnan(a[i]) && !std::isnan(b[i])) d.push_back(a[i] - b[i]);
  }
  return mean_se(d);
}

std::vector<double> finite_only(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) {
    if (!std::isnan(x)) out.push_back(x);
  }
  return out;
}

long scaled(double scale, long n) { return std::max(1L, static_cast<long>(std::llround(scale * static_cast<double>(n)))); }

std::string variant_of(const PolicySpec& s) {
  std::string out;
  for (const auto& [key, value] : s.params.items()) {
    if (!out.empty()) out += ";";
    out += key + "=" + (value.is_string() ? value.get<std::string>() : value.dump());
  }
  return out;
}

}  // namespace

json belief_robot_params(int particles) {
  return json{{"particles", particles}, {"rule", "posterior_mean"}, {"schedule", "none"}};
}

// --- propositions --------------------------------------------------------------

double finite_regret_bound(std::span<const double> frequencies, std::span<const double> theta) {
  if (frequencies.size() != theta.size()) throw std::invalid_argument("frequencies and theta differ in length");
  const BanditInstance inst(std::vector<double>(theta.begin(), theta.end()));
  const auto best = static_cast<std::size_t>(inst.best_arm());
  double total = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (i == best) continue;
    const double gap = inst.gap(static_cast<Arm>(i));
    if (gap == 0.0) continue;
    const double d = std::sqrt(frequencies[best]) - std::sqrt(frequencies[i]);
    if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
    total += gap / (d * d);
  }
  return total;
}

Prop1Result run_prop1(long episodes, std::uint64_t seed, int threads) {
  ExperimentConfig c = base_config(seed, threads);
  c.name = "prop1";
  c.theta = std::vector<double>{0.8, 0.5, 0.5, 0.5};
  c.horizon = 500;
  c.human = spec("epsilon_optimal", {{"epsilon", 0.1}});
  c.robot = spec("most_frequent");
  c.n_episodes = episodes;
  const auto r = run_batch(c);
  Prop1Result out;
  out.episodes = r.summary.n_episodes;
  out.regret_250 = r.summary.mean_cum_regret[249];
  out.regret_500 = r.summary.mean_cum_regret[499];
  out.se_500 = r.summary.se;
  const std::vector<double> f = {0.9 + 0.1 / 4, 0.1 / 4, 0.1 / 4, 0.1 / 4};
  out.bound = finite_regret_bound(f, *c.theta);
  return out;
}

Prop2Result run_prop2(long episodes, std::uint64_t seed, int threads, std::vector<double> theta) {
  ExperimentConfig c = base_config(seed, threads);
  c.name = "prop2";
  if (!theta.empty()) c.theta = std::move(theta);
  c.horizon = 2000;
  c.human = spec("epsilon_greedy", {{"epsilon", 0.1}});
  c.robot = spec("glie", {{"schedule", "squares"}});
  c.n_episodes = episodes;
  const auto r = run_batch(c);
  const auto& curve = r.summary.mean_cum_regret;
  return {r.summary.n_episodes, curve[499] / 500.0, curve[999] / 1000.0, curve[1999] / 2000.0};
}

Prop4Result run_prop4(long episodes, long belief_episodes, int particles, std::uint64_t seed, int threads) {
  ExperimentConfig c = base_config(seed, threads);
  c.name = "prop4";
  c.prior = "one_and_a_half";
  c.n_arms = 2;
  c.known_mean = 0.5;
  c.horizon = 1000;
  c.human = spec("epsilon_greedy", {{"epsilon", 0.0}});
  c.robot = spec("most_frequent");
  c.n_episodes = episodes;
  auto window = [](const std::vector<double>& curve, int from, int to) {
    const double before = from > 1 ? curve[static_cast<std::size_t>(from - 2)] : 0.0;
    return (curve[static_cast<std::size_t>(to - 1)] - before) / (to - from + 1);
  };
  Prop4Result out;
  const auto mfa = run_batch(c);
  out.episodes = mfa.summary.n_episodes;
  out.most_frequent_early = window(mfa.summary.mean_cum_regret, 1, 250);
  out.most_frequent_late = window(mfa.summary.mean_cum_regret, 751, 1000);
  c.robot = spec("belief", {{"particles", particles}, {"rule", "posterior_mean"}, {"schedule", "squares"}});
  c.n_episodes = belief_episodes;
  const auto belief = run_batch(c);
  out.belief_episodes = belief.summary.n_episodes;
  out.belief_early = window(belief.summary.mean_cum_regret, 1, 250);
  out.belief_late = window(belief.summary.mean_cum_regret, 751, 1000);
  return out;
}

namespace {

ExperimentConfig prop5_assisted(std::uint64_t seed) {
  ExperimentConfig c;
  c.name = "prop5";
  c.seed = seed;
  c.human = spec("wsls");
  c.robot = spec("wsls_decoder", {{"inner", {{"name", "gittins"}, {"params", {{"gamma", 0.9}}}}}});
  return c;
}

ExperimentConfig prop5_solo(std::uint64_t seed) {
  ExperimentConfig c = solo_of(prop5_assisted(seed));
  c.human = spec("gittins", {{"gamma", 0.9}});
  return c;
}

}  // namespace

Prop5Exactness run_prop5_exactness(long seeds, std::uint64_t seed) {
  const ExperimentConfig assisted = prop5_assisted(seed);
  const ExperimentConfig solo = prop5_solo(seed);
  Prop5Exactness out;
  out.seeds = seeds;
  for (long e = 0; e < seeds; ++e) {
    const auto a = run_episode(assisted, static_cast<std::uint64_t>(e));
    const auto s = run_episode(solo, static_cast<std::uint64_t>(e), StreamCoupling::kHumanOnRobotStream);
    int mismatch = 0;
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
      mismatch += a.steps[t].executed_arm != s.steps[t].executed_arm ? 1 : 0;
    }
    if (mismatch > 0) ++out.mismatched_seeds;
    out.max_mismatch = std::max(out.max_mismatch, mismatch);
  }
  return out;
}

Prop5Magnitude run_prop5_magnitude(long episodes, std::uint64_t seed, int threads) {
  ExperimentConfig assisted = prop5_assisted(seed);
  assisted.n_episodes = episodes;
  assisted.threads = threads;
  ExperimentConfig solo = prop5_solo(seed);
  solo.n_episodes = episodes;
  solo.threads = threads;
  const auto a = run_batch(assisted);
  BatchOptions coupled;
  coupled.coupling = StreamCoupling::kHumanOnRobotStream;
  const auto s = run_batch(solo, coupled);
  Prop5Magnitude out;
  out.episodes = episodes;
  out.assisted = mean_se(finite_only(a.regrets));
  out.solo = mean_se(finite_only(s.regrets));
  out.difference = paired_difference(a.regrets, s.regrets);
  return out;
}

// --- mutual information ----------------------------------------------------------

MiBestArm estimate_mi_best_arm(const ExperimentConfig& config, int prefix_t, long n_traj) {
  if (prefix_t < 1 || prefix_t > 8) throw std::invalid_argument("prefix_t must be in [1, 8]");
  if (n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
  ExperimentConfig c = config;
  c.horizon = prefix_t;
  validate(c);
  const int n = c.n_arms;
  const auto base = static_cast<std::uint32_t>(n + 1);
  std::uint32_t n_y = 1;
  for (int t = 0; t < prefix_t; ++t) n_y *= base;

  std::vector<int> best(static_cast<std::size_t>(n_traj));
  std::vector<std::uint32_t> code(static_cast<std::size_t>(n_traj));
  std::vector<char> wrong(static_cast<std::size_t>(n_traj));
  parallel_for(n_traj, c.threads, [&](long e) {
    const auto traj = run_episode(c, static_cast<std::uint64_t>(e));
    std::uint32_t y = 0;
    for (const auto& s : traj.steps) {
      y = y * base + static_cast<std::uint32_t>(s.human_arm ? *s.human_arm : n);
    }
    const auto i = static_cast<std::size_t>(e);
    best[i] = traj.instance.best_arm();
    code[i] = y;
    wrong[i] = traj.steps.back().executed_arm != best[i] ? 1 : 0;
  });
  RandomStream boot = SeedTree(c.seed).stream("mi-bootstrap", static_cast<std::uint64_t>(prefix_t), StreamRole::kBootstrap);
  MiBestArm out;
  out.mi = plug_in_mutual_information(best, code, n, n_y, boot);
  out.mi.prefix_t = prefix_t;
  long errors = 0;
  for (char w : wrong) errors += w;
  out.p_error = static_cast<double>(errors) / static_cast<double>(n_traj);
  out.p_error_se = std::sqrt(out.p_error * (1.0 - out.p_error) / static_cast<double>(n_traj));
  return out;
}

std::vector<PolicySpec> fig4_variants() {
  std::vector<PolicySpec> v;
  for (double e : {0.0, 0.02, 0.05, 0.1}) v.push_back(spec("epsilon_greedy", {{"epsilon", e}}));
  for (int n : {1, 2, 3, 10, 30}) v.push_back(spec("thompson", {{"particles", n}}));
  v.push_back(spec("thompson", {{"particles", "inf"}}));
  return v;
}

std::vector<FanoRow> run_fano_check(long n_traj, std::uint64_t seed, int threads) {
  std::vector<FanoRow> rows;
  for (const auto& human : fig4_variants()) {
    for (const auto& robot : {spec("copy"), spec("most_frequent")}) {
      ExperimentConfig c = base_config(seed, threads);
      c.name = "fano";
      c.human = human;
      c.robot = robot;
      FanoRow row;
      row.human = human;
      row.robot = robot;
      row.estimate = estimate_mi_best_arm(c, 5, n_traj);
      row.lower_bound = (1.0 - row.estimate.p_error) * std::log2(static_cast<double>(c.n_arms)) - 1.0;
      row.holds = row.estimate.mi.bits >= row.lower_bound - 3.0 * row.estimate.mi.se;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<Fig4Row> run_fig4(long mi_trajectories, long regret_episodes, int particles, std::uint64_t seed,
                              int threads) {
  std::vector<Fig4Row> rows;
  for (const auto& human : fig4_variants()) {
    ExperimentConfig assisted = base_config(seed, threads);
    assisted.name = "fig4";
    assisted.human = human;
    assisted.mode = InteractionMode::kTeleoperation;
    assisted.robot = spec("belief", belief_robot_params(particles));
    Fig4Row row;
    row.human = human;
    row.mi = estimate_mi_best_arm(assisted, 5, mi_trajectories).mi;
    assisted.n_episodes = regret_episodes;
    row.assisted_regret = mean_se(finite_only(run_batch(assisted).regrets));
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- inverse bandit ---------------------------------------------------------------------

std::vector<PolicySpec> table1_learners() {
  return {spec("epsilon_greedy", {{"epsilon", 0.1}}), spec("wsls"), spec("thompson", {{"particles", 1}}), spec("ucl"),
          spec("gittins", {{"gamma", 0.9}})};
}

std::vector<Table1Row> run_table1(const Table1Options& options) {
  const auto learners = table1_learners();
  const PolicySpec optimal = spec("epsilon_optimal", {{"epsilon", 0.1}});
  const BetaPrior prior = BetaPrior::uniform(4);
  std::vector<Table1Row> rows;
  for (const auto& learner : learners) {
    for (const auto& model : {learner, optimal}) {
      Table1Row row;
      row.actual = learner;
      row.assumed = model;
      row.values.assign(static_cast<std::size_t>(options.instances), kNaN);
      rows.push_back(std::move(row));
    }
  }
  const SeedTree tree(options.seed);
  parallel_for(options.instances, options.threads, [&](long i) {
    for (std::size_t l = 0; l < learners.size(); ++l) {
      ExperimentConfig c = base_config(options.seed, 1);
      c.mode = InteractionMode::kInverseSolo;
      c.horizon = options.horizon;
      c.human = learners[l];
      const auto traj = run_episode(c, static_cast<std::uint64_t>(i));
      ActionOnlyObservation obs;
      obs.n_arms = 4;
      for (const auto& s : traj.steps) obs.actions.push_back(*s.human_arm);
      for (std::size_t m = 0; m < 2; ++m) {
        auto& row = rows[2 * l + m];
        const auto model = make_human(row.assumed, prior);
        RandomStream rng = tree.stream(hash_name(row.actual.label() + "|" + row.assumed.label()),
                                       static_cast<std::uint64_t>(i), StreamRole::kInference);
        try {
          const auto post = mh_posterior(obs, *model, prior, options.mh, rng);
          row.values[static_cast<std::size_t>(i)] = log_density_at(traj.instance.theta(), post);
        } catch (const DegenerateChainError&) {
          // left as NaN and excluded from the mean
        }
      }
    }
  });
  for (auto& row : rows) row.log_density = mean_se(finite_only(row.values));
  return rows;
}

// --- comparisons -------------------------------------------------------------------

AssistanceComparison compare_to_solo(const ExperimentConfig& assisted) {
  const auto a = run_batch(assisted);
  const auto s = run_batch(solo_of(assisted));
  return {a.summary, s.summary, paired_difference(s.regrets, a.regrets)};
}

// --- reproduce ---------------------------------------------------------------------

const std::vector<std::string>& reproduce_ids() {
  static const std::vector<std::string> ids = {"table1", "fig3", "fig4", "fig5", "table2", "fig2-traj", "props"};
  return ids;
}

namespace {

struct Bundle {
  std::filesystem::path dir;
  std::vector<std::string> written;

  std::ofstream open(const std::string& name) {
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    written.push_back(path.string());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    return f;
  }
};

void write_regret_rows(CsvWriter& regret, CsvWriter& curve, const RegretSummary& s) {
  regret.row({s.human_policy, s.robot_policy, s.mode, fmt(s.n_episodes), fmt(s.mean_regret), fmt(s.se)});
  for (std::size_t t = 0; t < s.mean_cum_regret.size(); ++t) {
    curve.row({s.human_policy, s.robot_policy, fmt(static_cast<long>(t + 1)), fmt(s.mean_cum_regret[t])});
  }
}

constexpr int kDeskParticles = 512;

std::vector<PolicySpec> figure_humans() {
  return {spec("epsilon_greedy", {{"epsilon", 0.1}}), spec("wsls"), spec("thompson", {{"particles", 1}}), spec("ucl"),
          spec("gittins", {{"gamma", 0.9}})};
}

void reproduce_fig3(const ReproduceOptions& o, Bundle& b) {
  auto rf = b.open("regret.csv");
  auto cf = b.open("regret_curve.csv");
  CsvWriter regret(rf);
  CsvWriter curve(cf);
  regret.row(kRegretHeader);
  curve.row(kRegretCurveHeader);
  for (const auto& human : figure_humans()) {
    ExperimentConfig c = base_config(o.seed, o.threads);
    c.name = "fig3";
    c.human = human;
    const ExperimentConfig solo = [&] {
      ExperimentConfig s = solo_of(c);
      s.n_episodes = scaled(o.scale, 100000);
      return s;
    }();
    write_regret_rows(regret, curve, run_batch(solo).summary);
    c.robot = spec("belief", belief_robot_params(kDeskParticles));
    c.n_episodes = scaled(o.scale, 10000);
    write_regret_rows(regret, curve, run_batch(c).summary);
    c.robot = spec("most_frequent");
    c.n_episodes = scaled(o.scale, 100000);
    write_regret_rows(regret, curve, run_batch(c).summary);
  }
}

void reproduce_fig5(const ReproduceOptions& o, Bundle& b) {
  auto rf = b.open("regret.csv");
  auto cf = b.open("regret_curve.csv");
  CsvWriter regret(rf);
  CsvWriter curve(cf);
  regret.row(kRegretHeader);
  curve.row(kRegretCurveHeader);
  const PolicySpec optimal = spec("epsilon_optimal", {{"epsilon", 0.1}});
  for (const auto& human : figure_humans()) {
    ExperimentConfig c = base_config(o.seed, o.threads);
    c.name = "fig5";
    c.human = human;
    ExperimentConfig solo = solo_of(c);
    solo.n_episodes = scaled(o.scale, 100000);
    write_regret_rows(regret, curve, run_batch(solo).summary);
    c.n_episodes = scaled(o.scale, 10000);

    c.mode = InteractionMode::kTurnTaking;
    c.robot = spec("belief", belief_robot_params(kDeskParticles));
    write_regret_rows(regret, curve, run_batch(c).summary);
    c.robot = spec("most_frequent");
    write_regret_rows(regret, curve, run_batch(c).summary);

    c.mode = InteractionMode::kPreemptive;
    c.robot = spec("preemptive_scripted", {{"particles", kDeskParticles}});
    write_regret_rows(regret, curve, run_batch(c).summary);
    c.robot = spec("preemptive_scripted", {{"particles", kDeskParticles}, {"model", to_json(optimal)}});
    write_regret_rows(regret, curve, run_batch(c).summary);
  }
}

void reproduce_table2(const ReproduceOptions& o, Bundle& b) {
  auto f = b.open("grid.csv");
  CsvWriter w(f);
  w.row(kGridHeader);
  ExperimentConfig base = base_config(o.seed, o.threads);
  base.name = "table2";
  base.n_episodes = scaled(o.scale, 2000);
  const std::vector<PolicySpec> actual = {spec("epsilon_greedy", {{"epsilon", 0.1}}), spec("wsls"),
                                          spec("thompson", {{"particles", 1}}), spec("ucl")};
  std::vector<PolicySpec> assumed = actual;
  assumed.push_back(spec("epsilon_optimal", {{"epsilon", 0.1}}));
  for (const auto& h : actual) {
    for (const auto& m : assumed) {
      const auto cell = run_cross_model_cell(base, h, m, belief_robot_params(kDeskParticles));
      w.row({cell.actual.label(), cell.assumed.label(), std::string(to_string(cell.mode)), fmt(cell.reward_delta),
             fmt(cell.se)});
    }
  }
}

void reproduce_table1(const ReproduceOptions& o, Bundle& b) {
  Table1Options t;
  t.instances = scaled(o.scale, 200);
  t.seed = o.seed;
  t.threads = o.threads;
  auto f = b.open("table1.csv");
  CsvWriter w(f);
  w.row(kTable1Header);
  for (const auto& row : run_table1(t)) {
    w.row({row.actual.label(), row.assumed.label(), fmt(row.log_density.mean), fmt(row.log_density.se),
           fmt(row.log_density.n)});
  }
}

void reproduce_fig4(const ReproduceOptions& o, Bundle& b) {
  auto f = b.open("mi.csv");
  CsvWriter w(f);
  w.row(kMiHeader);
  for (const auto& row : run_fig4(scaled(o.scale, 20000), scaled(o.scale, 10000), kDeskParticles, o.seed, o.threads)) {
    w.row({row.human.name, variant_of(row.human), fmt(row.mi.prefix_t), fmt(row.mi.bits), fmt(row.mi.se),
           fmt(row.assisted_regret.mean), fmt(row.assisted_regret.se)});
  }
}

void reproduce_fig2(const ReproduceOptions& o, Bundle& b) {
  ExperimentConfig c = base_config(o.seed, 1);
  c.name = "fig2";
  c.mode = InteractionMode::kPreemptive;
  c.human = spec("epsilon_greedy", {{"epsilon", 0.1}});
  const std::vector<std::pair<std::string, PolicySpec>> robots = {
      {"fig2_learning_model.csv", spec("preemptive_scripted", {{"particles", 2048}})},
      {"fig2_optimal_model.csv",
       spec("preemptive_scripted", {{"particles", 2048}, {"model", to_json(spec("epsilon_optimal", {{"epsilon", 0.1}}))}})}};
  for (const auto& [file, robot] : robots) {
    c.robot = robot;
    auto f = b.open(file);
    CsvWriter w(f);
    w.row(trajectory_header(c.n_arms));
    write_trajectory_rows(w, 0, run_episode(c, 0));
  }
}

void reproduce_props(const ReproduceOptions& o, Bundle& b) {
  auto f = b.open("props.csv");
  CsvWriter w(f);
  w.row({"property", "statistic", "value", "threshold", "pass"});
  auto row = [&](const std::string& p, const std::string& s, double v, double th, bool pass) {
    w.row({p, s, fmt(v), fmt(th), pass ? "true" : "false"});
  };
  const auto p1 = run_prop1(scaled(o.scale, 100000), o.seed, o.threads);
  row("prop1", "regret_500", p1.regret_500, p1.bound, p1.regret_500 <= p1.bound);
  row("prop1", "regret_500_minus_250", p1.regret_500 - p1.regret_250, 0.05, p1.regret_500 - p1.regret_250 < 0.05);
  const auto p2 = run_prop2(scaled(o.scale, 10000), o.seed, o.threads);
  row("prop2", "per_round_2000_over_500", p2.per_round_2000 / p2.per_round_500, 0.5,
      p2.per_round_2000 < 0.5 * p2.per_round_500);
  const auto p4 = run_prop4(scaled(o.scale, 10000), scaled(o.scale, 2000), 64, o.seed, o.threads);
  row("prop4", "most_frequent_late_over_early", p4.most_frequent_late / p4.most_frequent_early, 0.9,
      p4.most_frequent_late >= 0.9 * p4.most_frequent_early);
  row("prop4", "belief_late_over_early", p4.belief_late / p4.belief_early, 0.5, p4.belief_late < 0.5 * p4.belief_early);
  const auto p5 = run_prop5_exactness(scaled(o.scale, 10000), o.seed);
  row("prop5", "max_executed_arm_mismatch", p5.max_mismatch, 0, p5.max_mismatch == 0);
  const auto m5 = run_prop5_magnitude(scaled(o.scale, 100000), o.seed, o.threads);
  row("prop5", "assisted_minus_solo_regret", m5.difference.mean, 2.0 * m5.difference.se,
      std::abs(m5.difference.mean) <= 2.0 * m5.difference.se);
}

}  // namespace

std::vector<std::string> reproduce(const std::string& id, const ReproduceOptions& options) {
  Bundle b{std::filesystem::path(options.out_dir) / id, {}};
  if (id == "table1") {
    reproduce_table1(options, b);
  } else if (id == "fig3") {
    reproduce_fig3(options, b);
  } else if (id == "fig4") {
    reproduce_fig4(options, b);
  } else if (id == "fig5") {
    reproduce_fig5(options, b);
  } else if (id == "table2") {
    reproduce_table2(options, b);
  } else if (id == "fig2-traj") {
    reproduce_fig2(options, b);
  } else if (id == "props") {
    reproduce_props(options, b);
  } else {
    throw ConfigError("unknown reproduce id '" + id + "'");
  }
  return b.written;
}

}  // namespace amab
