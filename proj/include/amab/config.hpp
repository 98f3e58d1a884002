#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "amab/bandit.hpp"
#include "amab/episode.hpp"
#include "amab/human_policy.hpp"
#include "amab/random.hpp"
#include "amab/robot_policy.hpp"

namespace amab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A policy name from the registry plus its parameters.
struct PolicySpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();

  // Name plus sorted parameters, e.g. "thompson(particles=1)". Used in CSVs.
  std::string label() const;
  bool operator==(const PolicySpec&) const = default;
};

PolicySpec parse_policy_spec(const nlohmann::json& j);
nlohmann::json to_json(const PolicySpec& spec);

struct ExperimentConfig {
  std::string name = "experiment";
  InteractionMode mode = InteractionMode::kTeleoperation;
  int horizon = 50;
  int n_arms = 4;
  // "uniform" (Beta(1,1) on every arm) or "one_and_a_half" (arm 0 known).
  std::string prior = "uniform";
  double known_mean = 0.5;
  // Fixed instance; sampled from the prior per episode when absent.
  std::optional<std::vector<double>> theta;
  PolicySpec human{"thompson", {{"particles", 1}}};
  PolicySpec robot{"none", nlohmann::json::object()};
  // Model the robot assumes for the human; defaults to the actual human.
  std::optional<PolicySpec> assumed_human;
  long n_episodes = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
  bool human_first = true;
  std::string out_dir = "out";

  BetaPrior beta_prior() const;
};

// Parses and validates. Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

const std::vector<std::string>& registered_humans();
const std::vector<std::string>& registered_robots();

std::unique_ptr<HumanPolicy> make_human(const PolicySpec& spec, const BetaPrior& prior);

// Builds the robot named by config.robot; nullptr for "none". Model-based
// robots use params.model, else config.assumed_human, else config.human.
std::unique_ptr<RobotPolicy> make_robot(const ExperimentConfig& config, const BetaPrior& prior,
                                        RandomStream particle_stream);

}  // namespace amab
