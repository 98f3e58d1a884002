#include "amab/config.hpp"

#include <algorithm>
#include <cmath>

#include "amab/gittins.hpp"

namespace amab {
namespace {

using nlohmann::json;

template <class T>
T param(const PolicySpec& spec, const char* key, T fallback) {
  if (!spec.params.contains(key)) return fallback;
  try {
    return spec.params.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(spec.name + "." + key + ": wrong type");
  }
}

std::string format_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

const std::vector<std::string> kHumans = {"epsilon_greedy", "wsls",    "thompson",      "ucl",
                                          "gittins",        "epsilon_optimal", "communicative", "constant"};
const std::vector<std::string> kRobots = {"none",          "copy",          "most_frequent",       "glie",
                                          "wsls_decoder",  "communicative_decoder", "belief", "preemptive_scripted"};

void check_known_params(const PolicySpec& spec, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : spec.params.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(spec.name + ": unknown parameter '" + key + "'");
    }
  }
}

int thompson_draws(const PolicySpec& spec) {
  if (!spec.params.contains("particles")) return 1;
  const auto& v = spec.params.at("particles");
  if (v.is_string() && (v == "inf" || v == "infinity")) return 0;
  if (!v.is_number_integer() || v.get<int>() < 0) throw ConfigError("thompson.particles must be >= 0 or \"inf\"");
  return v.get<int>();
}

void validate_human(const PolicySpec& spec, int n_arms) {
  const auto& n = spec.name;
  if (std::find(kHumans.begin(), kHumans.end(), n) == kHumans.end()) {
    throw ConfigError("unknown human policy '" + n + "'");
  }
  if (!spec.params.is_object() && !spec.params.is_null()) throw ConfigError(n + ": params must be an object");
  if (n == "epsilon_greedy" || n == "epsilon_optimal") {
    check_known_params(spec, {"epsilon"});
    const double e = param(spec, "epsilon", 0.1);
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError(n + ".epsilon must be in [0, 1]");
  } else if (n == "thompson") {
    check_known_params(spec, {"particles"});
    thompson_draws(spec);
  } else if (n == "ucl") {
    check_known_params(spec, {"k", "tau", "orientation"});
    if (!(param(spec, "k", 4.0) > 0.0) || !(param(spec, "tau", 4.0) > 0.0)) throw ConfigError("ucl.k and ucl.tau must be positive");
    const auto o = param<std::string>(spec, "orientation", "inverse_temperature");
    if (o != "inverse_temperature" && o != "temperature") throw ConfigError("ucl.orientation must be inverse_temperature or temperature");
  } else if (n == "gittins") {
    check_known_params(spec, {"gamma", "cap", "tolerance"});
    const double g = param(spec, "gamma", 0.9);
    if (!(g > 0.0 && g < 1.0)) throw ConfigError("gittins.gamma must be in (0, 1)");
    if (param(spec, "cap", 200) < 2) throw ConfigError("gittins.cap must be >= 2");
    if (!(param(spec, "tolerance", 1e-7) > 0.0)) throw ConfigError("gittins.tolerance must be positive");
  } else if (n == "constant") {
    check_known_params(spec, {"arm"});
    const int a = param(spec, "arm", 0);
    if (a < 0 || a >= n_arms) throw ConfigError("constant.arm out of range");
  } else {
    check_known_params(spec, {});
  }
}

ExplorationSchedule::Kind parse_schedule(const PolicySpec& spec, const char* fallback) {
  const auto s = param<std::string>(spec, "schedule", fallback);
  if (s == "squares") return ExplorationSchedule::Kind::kSquares;
  if (s == "none") return ExplorationSchedule::Kind::kNone;
  throw ConfigError(spec.name + ".schedule must be squares or none");
}

void validate_robot(const ExperimentConfig& c) {
  const auto& spec = c.robot;
  const auto& n = spec.name;
  if (std::find(kRobots.begin(), kRobots.end(), n) == kRobots.end()) {
    throw ConfigError("unknown robot policy '" + n + "'");
  }
  if (!spec.params.is_object() && !spec.params.is_null()) throw ConfigError(n + ": params must be an object");
  if (n == "glie") {
    check_known_params(spec, {"schedule"});
    parse_schedule(spec, "squares");
  } else if (n == "wsls_decoder" || n == "communicative_decoder") {
    check_known_params(spec, {"inner"});
    if (spec.params.contains("inner")) validate_human(parse_policy_spec(spec.params.at("inner")), c.n_arms);
  } else if (n == "belief" || n == "preemptive_scripted") {
    if (n == "belief") {
      check_known_params(spec, {"model", "particles", "ess_threshold", "schedule", "rule"});
      parse_schedule(spec, "none");
      const auto r = param<std::string>(spec, "rule", "posterior_mean");
      if (r != "thompson" && r != "posterior_mean") throw ConfigError("belief.rule must be thompson or posterior_mean");
    } else {
      check_known_params(spec, {"model", "particles", "ess_threshold", "explore", "observe", "belief"});
      if (param(spec, "explore", 8) < 0 || param(spec, "observe", 12) < 0) {
        throw ConfigError("preemptive_scripted phase lengths must be >= 0");
      }
    }
    if (param(spec, "particles", 2048) < 1) throw ConfigError(n + ".particles must be >= 1");
    const double ess = param(spec, "ess_threshold", 0.5);
    if (!(ess >= 0.0 && ess <= 1.0)) throw ConfigError(n + ".ess_threshold must be in [0, 1]");
    if (spec.params.contains("model")) validate_human(parse_policy_spec(spec.params.at("model")), c.n_arms);
  } else {
    check_known_params(spec, {});
  }
}

PolicySpec belief_model(const ExperimentConfig& c) {
  if (c.robot.params.contains("model")) return parse_policy_spec(c.robot.params.at("model"));
  if (c.assumed_human) return *c.assumed_human;
  return c.human;
}

ParticleFilterConfig filter_config(const PolicySpec& spec) {
  ParticleFilterConfig f;
  f.n_particles = param(spec, "particles", 2048);
  f.ess_threshold = param(spec, "ess_threshold", 0.5);
  return f;
}

}  // namespace

std::string PolicySpec::label() const {
  if (params.empty()) return name;
  std::string out = name + "(";
  bool first = true;
  for (const auto& [key, value] : params.items()) {  // nlohmann objects iterate in key order
    if (!first) out += ",";
    first = false;
    out += key + "=" + (value.is_object() ? json(value).dump() : format_value(value));
  }
  return out + ")";
}

PolicySpec parse_policy_spec(const json& j) {
  PolicySpec s;
  if (j.is_string()) {
    s.name = j.get<std::string>();
    return s;
  }
  if (!j.is_object() || !j.contains("name") || !j.at("name").is_string()) {
    throw ConfigError("policy spec must be a name or an object with a string 'name'");
  }
  s.name = j.at("name").get<std::string>();
  if (j.contains("params")) s.params = j.at("params");
  for (const auto& [key, value] : j.items()) {
    if (key != "name" && key != "params") throw ConfigError("policy spec: unknown key '" + key + "'");
  }
  return s;
}

json to_json(const PolicySpec& spec) { return json{{"name", spec.name}, {"params", spec.params}}; }

BetaPrior ExperimentConfig::beta_prior() const {
  if (prior == "one_and_a_half") return BetaPrior::one_and_a_half(known_mean);
  return BetaPrior::uniform(n_arms);
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  static const std::vector<std::string> keys = {"name",  "mode",          "horizon",    "n_arms",   "prior",
                                                "known_mean", "theta",    "human",      "robot",    "assumed_human",
                                                "n_episodes", "seed",     "threads",    "human_first", "out_dir"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    if (j.contains("name")) c.name = j.at("name").get<std::string>();
    if (j.contains("mode")) {
      const auto m = parse_mode(j.at("mode").get<std::string>());
      if (!m) throw ConfigError("unknown mode '" + j.at("mode").get<std::string>() + "'");
      c.mode = *m;
    }
    if (j.contains("horizon")) c.horizon = j.at("horizon").get<int>();
    if (j.contains("n_arms")) c.n_arms = j.at("n_arms").get<int>();
    if (j.contains("prior")) c.prior = j.at("prior").get<std::string>();
    if (j.contains("known_mean")) c.known_mean = j.at("known_mean").get<double>();
    if (j.contains("theta")) c.theta = j.at("theta").get<std::vector<double>>();
    if (j.contains("human")) c.human = parse_policy_spec(j.at("human"));
    if (j.contains("robot")) c.robot = parse_policy_spec(j.at("robot"));
    if (j.contains("assumed_human")) c.assumed_human = parse_policy_spec(j.at("assumed_human"));
    if (j.contains("n_episodes")) c.n_episodes = j.at("n_episodes").get<long>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("human_first")) c.human_first = j.at("human_first").get<bool>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  validate(c);
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j{{"name", c.name},
         {"mode", std::string(to_string(c.mode))},
         {"horizon", c.horizon},
         {"n_arms", c.n_arms},
         {"prior", c.prior},
         {"known_mean", c.known_mean},
         {"human", to_json(c.human)},
         {"robot", to_json(c.robot)},
         {"n_episodes", c.n_episodes},
         {"seed", c.seed},
         {"threads", c.threads},
         {"human_first", c.human_first},
         {"out_dir", c.out_dir}};
  if (c.theta) j["theta"] = *c.theta;
  if (c.assumed_human) j["assumed_human"] = to_json(*c.assumed_human);
  return j;
}

void validate(const ExperimentConfig& c) {
  if (c.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (c.n_episodes < 1) throw ConfigError("n_episodes must be >= 1");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.prior == "uniform") {
    if (c.n_arms < 2) throw ConfigError("n_arms must be >= 2");
  } else if (c.prior == "one_and_a_half") {
    if (c.n_arms != 2) throw ConfigError("one_and_a_half prior has exactly 2 arms");
    if (!(c.known_mean >= 0.0 && c.known_mean <= 1.0)) throw ConfigError("known_mean must be in [0, 1]");
  } else {
    throw ConfigError("prior must be uniform or one_and_a_half");
  }
  if (c.theta) {
    if (static_cast<int>(c.theta->size()) != c.n_arms) throw ConfigError("theta must have n_arms entries");
    for (double v : *c.theta) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("theta entries must be in [0, 1]");
    }
  }
  validate_human(c.human, c.n_arms);
  if (c.assumed_human) validate_human(*c.assumed_human, c.n_arms);
  validate_robot(c);
  if (is_solo(c.mode) && c.robot.name != "none") throw ConfigError("solo modes take robot 'none'");
  if (!is_solo(c.mode) && c.robot.name == "none") throw ConfigError("assisted modes need a robot");
}

const std::vector<std::string>& registered_humans() { return kHumans; }
const std::vector<std::string>& registered_robots() { return kRobots; }

std::unique_ptr<HumanPolicy> make_human(const PolicySpec& spec, const BetaPrior& prior) {
  validate_human(spec, prior.n_arms());
  const auto& n = spec.name;
  const int arms = prior.n_arms();
  if (n == "epsilon_greedy") return std::make_unique<EpsilonGreedy>(prior, param(spec, "epsilon", 0.1));
  if (n == "wsls") return std::make_unique<WinStayLoseShift>(arms);
  if (n == "thompson") return std::make_unique<ThompsonSampling>(prior, thompson_draws(spec));
  if (n == "ucl") {
    const auto o = param<std::string>(spec, "orientation", "inverse_temperature") == "temperature"
                       ? SoftmaxOrientation::kTemperature
                       : SoftmaxOrientation::kInverseTemperature;
    return std::make_unique<UpperCredibleLimit>(prior, param(spec, "k", 4.0), param(spec, "tau", 4.0), o);
  }
  if (n == "gittins") {
    auto table = shared_gittins_table(param(spec, "gamma", 0.9), param(spec, "cap", 200), param(spec, "tolerance", 1e-7));
    return std::make_unique<GittinsIndexPolicy>(prior, std::move(table));
  }
  if (n == "epsilon_optimal") return std::make_unique<EpsilonOptimal>(arms, param(spec, "epsilon", 0.1));
  if (n == "communicative") return std::make_unique<Communicative>(arms);
  if (n == "constant") return std::make_unique<ConstantHuman>(arms, param(spec, "arm", 0));
  throw ConfigError("unknown human policy '" + n + "'");
}

std::unique_ptr<RobotPolicy> make_robot(const ExperimentConfig& c, const BetaPrior& prior,
                                        RandomStream particle_stream) {
  const auto& spec = c.robot;
  const auto& n = spec.name;
  const int arms = prior.n_arms();
  if (n == "none") return nullptr;
  if (n == "copy") return std::make_unique<CopyRobot>(arms);
  if (n == "most_frequent") return std::make_unique<MostFrequentArm>(arms);
  if (n == "glie") return std::make_unique<GlieAssist>(arms, ExplorationSchedule(parse_schedule(spec, "squares"), arms));
  if (n == "wsls_decoder" || n == "communicative_decoder") {
    const PolicySpec inner = spec.params.contains("inner") ? parse_policy_spec(spec.params.at("inner"))
                                                           : PolicySpec{"gittins", {{"gamma", 0.9}}};
    const auto code = n == "wsls_decoder" ? RewardDecoderRobot::Code::kWinStayLoseShift
                                          : RewardDecoderRobot::Code::kCommunicative;
    return std::make_unique<RewardDecoderRobot>(code, make_human(inner, prior));
  }
  if (n == "belief") {
    BeliefAssistantConfig bc;
    bc.filter = filter_config(spec);
    bc.schedule = parse_schedule(spec, "none");
    bc.rule = param<std::string>(spec, "rule", "posterior_mean") == "thompson" ? ActionRule::kThompson
                                                                            : ActionRule::kPosteriorMean;
    const auto model = make_human(belief_model(c), prior);
    return std::make_unique<BeliefAssistant>(prior, *model, bc, particle_stream);
  }
  if (n == "preemptive_scripted") {
    PhaseConfig phases{param(spec, "explore", 8), param(spec, "observe", 12)};
    std::unique_ptr<ParticleSet> belief;
    if (param(spec, "belief", true)) {
      const auto model = make_human(belief_model(c), prior);
      belief = std::make_unique<ParticleSet>(prior, *model, filter_config(spec), particle_stream);
    }
    return std::make_unique<PreemptiveScripted>(arms, phases, std::move(belief));
  }
  throw ConfigError("unknown robot policy '" + n + "'");
}

}  // namespace amab
