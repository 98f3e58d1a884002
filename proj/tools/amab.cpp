#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "amab/batch.hpp"
#include "amab/config.hpp"
#include "amab/csv.hpp"
#include "amab/episode.hpp"
#include "amab/experiments.hpp"
#include "amab/inference.hpp"
#include "amab/mutual_information.hpp"
#include "amab/stats.hpp"

namespace fs = std::filesystem;
using namespace amab;

namespace {

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  long episodes = 0;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "experiment config (JSON)");
  cmd->add_option("--seed", c.seed, "master seed (overrides config)");
  cmd->add_option("--episodes", c.episodes, "episode / instance count (overrides config)");
  cmd->add_option("--out", c.out, "output directory (overrides config)");
  cmd->add_option("--threads", c.threads, "worker threads (overrides config)");
}

ExperimentConfig load_config(const Common& c, const CLI::App* cmd) {
  nlohmann::json j = nlohmann::json::object();
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    if (!in) throw ConfigError("cannot open config '" + c.config_path + "'");
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config '" + c.config_path + "': " + e.what());
    }
  }
  if (cmd->count("--seed")) j["seed"] = c.seed;
  if (cmd->count("--episodes")) j["n_episodes"] = c.episodes;
  if (cmd->count("--out")) j["out_dir"] = c.out;
  if (cmd->count("--threads")) j["threads"] = c.threads;
  return parse_config(j);
}

std::ofstream open_out(const std::string& dir, const std::string& file) {
  fs::create_directories(dir);
  const auto path = fs::path(dir) / file;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  std::cout << "wrote " << path.string() << "\n";
  return f;
}

// Three rows per episode: suggestions ('.' when absent), executed arms, rewards.
void print_layout(const Trajectory& traj) {
  std::ostringstream t, s, e, r;
  t << "t         ";
  s << "suggested ";
  e << "executed  ";
  r << "reward    ";
  for (const auto& step : traj.steps) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%4d", step.t);
    t << buf;
    s << "   " << (step.human_arm ? std::to_string(*step.human_arm) : std::string("."));
    e << "   " << step.executed_arm;
    r << "   " << step.reward;
  }
  std::cout << "theta";
  for (double v : traj.instance.theta()) std::cout << " " << fmt(v);
  std::cout << "  best arm " << traj.instance.best_arm() << "\n"
            << t.str() << "\n" << s.str() << "\n" << e.str() << "\n" << r.str() << "\n";
}

void write_regret(const std::string& dir, const RegretSummary& s) {
  {
    auto f = open_out(dir, "regret.csv");
    CsvWriter w(f);
    w.row(kRegretHeader);
    w.row({s.human_policy, s.robot_policy, s.mode, fmt(s.n_episodes), fmt(s.mean_regret), fmt(s.se)});
  }
  auto f = open_out(dir, "regret_curve.csv");
  CsvWriter w(f);
  w.row(kRegretCurveHeader);
  for (std::size_t t = 0; t < s.mean_cum_regret.size(); ++t) {
    w.row({s.human_policy, s.robot_policy, fmt(static_cast<long>(t + 1)), fmt(s.mean_cum_regret[t])});
  }
}

std::vector<PolicySpec> parse_policy_list(const std::vector<std::string>& items) {
  std::vector<PolicySpec> out;
  for (const auto& s : items) {
    // Either a bare registry name or a JSON {name, params} object.
    nlohmann::json j;
    if (!s.empty() && s.front() == '{') {
      try {
        j = nlohmann::json::parse(s);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("policy '" + s + "': " + e.what());
      }
    } else {
      j = s;
    }
    out.push_back(parse_policy_spec(j));
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Assistive multi-armed bandit simulator"};
  app.require_subcommand(1);

  Common common;

  auto* simulate = app.add_subcommand("simulate", "run one episode and print its trajectory");
  add_common(simulate, common);
  long episode_index = 0;
  simulate->add_option("--episode", episode_index, "episode index within the seed");

  auto* batch = app.add_subcommand("batch", "run a batch and write regret.csv / regret_curve.csv");
  add_common(batch, common);
  bool keep_trajectories = false;
  batch->add_flag("--trajectories", keep_trajectories, "also write trajectories.csv");

  auto* grid = app.add_subcommand("grid", "cross-model sensitivity grid (grid.csv)");
  add_common(grid, common);
  std::vector<std::string> actual_names = {"epsilon_greedy", "wsls", "thompson", "ucl"};
  std::vector<std::string> assumed_names = {"epsilon_greedy", "wsls", "thompson", "ucl", "epsilon_optimal"};
  int grid_particles = 512;
  grid->add_option("--actual", actual_names, "actual human policies (names or JSON specs)");
  grid->add_option("--assumed", assumed_names, "assumed human models (names or JSON specs)");
  grid->add_option("--particles", grid_particles, "belief assistant particles");

  auto* inverse = app.add_subcommand("inverse", "MH inference of theta from the human's actions (table1.csv)");
  add_common(inverse, common);
  int inverse_horizon = 5;
  MhConfig mh;
  inverse->add_option("--horizon", inverse_horizon, "actions observed per instance");
  inverse->add_option("--samples", mh.n_samples, "posterior samples kept");
  inverse->add_option("--iterations", mh.iterations_per_chain, "MH iterations per chain");
  inverse->add_flag("--mc-likelihood", mh.monte_carlo_likelihood, "pseudo-marginal Monte-Carlo likelihood");

  auto* mi = app.add_subcommand("mi", "mutual information between the best arm and the first t suggestions");
  add_common(mi, common);
  int prefix_t = 5;
  mi->add_option("--t", prefix_t, "prefix length")->check(CLI::Range(1, 8));

  auto* reproduce_cmd = app.add_subcommand("reproduce", "write the CSV bundle for a figure or table");
  std::string reproduce_id;
  ReproduceOptions ro;
  reproduce_cmd->add_option("id", reproduce_id, "table1 | fig2-traj | fig3 | fig4 | fig5 | table2 | props")->required();
  reproduce_cmd->add_option("--seed", ro.seed, "master seed");
  reproduce_cmd->add_option("--out", ro.out_dir, "output directory");
  reproduce_cmd->add_option("--threads", ro.threads, "worker threads");
  reproduce_cmd->add_option("--scale", ro.scale, "multiplier on the default episode counts");

  auto* props = app.add_subcommand("props", "numerical checks of the propositions (props.csv)");
  ReproduceOptions po;
  props->add_option("--seed", po.seed, "master seed");
  props->add_option("--out", po.out_dir, "output directory");
  props->add_option("--threads", po.threads, "worker threads");
  props->add_option("--scale", po.scale, "multiplier on the default episode counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*simulate) {
    const auto config = load_config(common, simulate);
    const auto traj = run_episode(config, static_cast<std::uint64_t>(episode_index));
    print_layout(traj);
    if (simulate->count("--out")) {
      auto f = open_out(config.out_dir, "trajectories.csv");
      CsvWriter w(f);
      w.row(trajectory_header(config.n_arms));
      write_trajectory_rows(w, episode_index, traj);
    }
    return 0;
  }

  if (*batch) {
    const auto config = load_config(common, batch);
    const auto result = run_batch(config, BatchOptions{keep_trajectories});
    const auto& s = result.summary;
    std::cout << s.human_policy << " + " << s.robot_policy << " (" << s.mode << "): mean regret " << fmt(s.mean_regret)
              << " +- " << fmt(s.se) << " over " << s.n_episodes << " episodes\n";
    for (const auto& f : s.failures) {
      std::cerr << "episode " << f.episode << " (seed " << f.seed << ") failed: " << f.error << "\n";
    }
    write_regret(config.out_dir, s);
    if (keep_trajectories) {
      auto f = open_out(config.out_dir, "trajectories.csv");
      CsvWriter w(f);
      w.row(trajectory_header(config.n_arms));
      for (std::size_t e = 0; e < result.trajectories.size(); ++e) {
        if (!std::isnan(result.regrets[e])) write_trajectory_rows(w, static_cast<long>(e), result.trajectories[e]);
      }
    }
    return s.n_episodes > 0 ? 0 : 2;
  }

  if (*grid) {
    const auto config = load_config(common, grid);
    const auto cells = run_cross_model_grid(config, parse_policy_list(actual_names), parse_policy_list(assumed_names),
                                            belief_robot_params(grid_particles));
    auto f = open_out(config.out_dir, "grid.csv");
    CsvWriter w(f);
    w.row(kGridHeader);
    for (const auto& c : cells) {
      std::cout << c.actual.label() << " / " << c.assumed.label() << ": " << fmt(c.reward_delta) << " +- "
                << fmt(c.se) << "\n";
      w.row({c.actual.label(), c.assumed.label(), std::string(to_string(c.mode)), fmt(c.reward_delta), fmt(c.se)});
    }
    return 0;
  }

  if (*inverse) {
    auto config = load_config(common, inverse);
    config.mode = InteractionMode::kInverseSolo;
    config.robot = {"none", nlohmann::json::object()};
    config.horizon = inverse_horizon;
    validate(config);
    const BetaPrior prior = config.beta_prior();
    const PolicySpec assumed = config.assumed_human.value_or(config.human);
    const auto model = make_human(assumed, prior);
    std::vector<double> values(static_cast<std::size_t>(config.n_episodes), std::numeric_limits<double>::quiet_NaN());
    const SeedTree tree(config.seed);
    parallel_for(config.n_episodes, config.threads, [&](long i) {
      const auto traj = run_episode(config, static_cast<std::uint64_t>(i));
      ActionOnlyObservation obs;
      obs.n_arms = config.n_arms;
      for (const auto& s : traj.steps) obs.actions.push_back(*s.human_arm);
      RandomStream rng = tree.stream(0, static_cast<std::uint64_t>(i), StreamRole::kInference);
      try {
        values[static_cast<std::size_t>(i)] = log_density_at(traj.instance.theta(), mh_posterior(obs, *model, prior, mh, rng));
      } catch (const DegenerateChainError& e) {
        std::cerr << "instance " << i << ": " << e.what() << "\n";
      }
    });
    std::vector<double> ok;
    for (double v : values) {
      if (!std::isnan(v)) ok.push_back(v);
    }
    const MeanSe m = mean_se(ok);
    std::cout << config.human.label() << " assumed " << assumed.label() << ": mean log density " << fmt(m.mean)
              << " +- " << fmt(m.se) << " (n=" << m.n << ")\n";
    auto f = open_out(config.out_dir, "table1.csv");
    CsvWriter w(f);
    w.row(kTable1Header);
    w.row({config.human.label(), assumed.label(), fmt(m.mean), fmt(m.se), fmt(m.n)});
    return m.n > 0 ? 0 : 2;
  }

  if (*mi) {
    const auto config = load_config(common, mi);
    const auto est = estimate_mi_best_arm(config, prefix_t, config.n_episodes);
    ExperimentConfig full = config;
    const auto regret = run_batch(full).summary;
    std::cout << config.human.label() << " + " << config.robot.label() << ": I = " << fmt(est.mi.bits) << " +- "
              << fmt(est.mi.se) << " bits at t=" << prefix_t << ", P(error at t) = " << fmt(est.p_error)
              << ", regret " << fmt(regret.mean_regret) << " +- " << fmt(regret.se) << "\n";
    auto f = open_out(config.out_dir, "mi.csv");
    CsvWriter w(f);
    w.row(kMiHeader);
    w.row({config.human.name, config.human.label(), fmt(prefix_t), fmt(est.mi.bits), fmt(est.mi.se),
           fmt(regret.mean_regret), fmt(regret.se)});
    return 0;
  }

  if (*reproduce_cmd) {
    for (const auto& p : reproduce(reproduce_id, ro)) std::cout << "wrote " << p << "\n";
    return 0;
  }

  if (*props) {
    for (const auto& p : reproduce("props", po)) {
      std::cout << "wrote " << p << "\n";
      std::ifstream in(p);
      std::cout << in.rdbuf();
    }
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
