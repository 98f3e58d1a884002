#include "amab/episode.hpp"

#include <stdexcept>

namespace amab {

std::string_view to_string(InteractionMode mode) {
  switch (mode) {
    case InteractionMode::kTeleoperation: return "teleoperation";
    case InteractionMode::kTurnTaking: return "turn_taking";
    case InteractionMode::kPreemptive: return "preemptive";
    case InteractionMode::kSolo: return "solo";
    case InteractionMode::kInverseSolo: return "inverse_solo";
  }
  return "unknown";
}

std::optional<InteractionMode> parse_mode(std::string_view name) {
  for (auto m : {InteractionMode::kTeleoperation, InteractionMode::kTurnTaking, InteractionMode::kPreemptive,
                 InteractionMode::kSolo, InteractionMode::kInverseSolo}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

bool is_solo(InteractionMode mode) {
  return mode == InteractionMode::kSolo || mode == InteractionMode::kInverseSolo;
}

Trajectory simulate_episode(InteractionMode mode, const BanditInstance& instance, HumanPolicy& human,
                            RobotPolicy* robot, int horizon, EpisodeStreams& streams, ProtocolOptions options) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (human.n_arms() != instance.n_arms()) throw std::invalid_argument("human/instance arm count mismatch");
  if (is_solo(mode) && robot != nullptr) throw std::invalid_argument("solo modes take no robot");
  if (!is_solo(mode) && robot == nullptr) throw std::invalid_argument("assisted modes need a robot");

  human.reset();
  if (human.uses_reward_parameters()) human.bind_reward_parameters(instance.theta());

  Trajectory traj;
  traj.instance = instance;
  traj.steps.reserve(static_cast<std::size_t>(horizon));
  for (int t = 1; t <= horizon; ++t) {
    StepRecord step;
    step.t = t;
    switch (mode) {
      case InteractionMode::kSolo:
      case InteractionMode::kInverseSolo: {
        step.human_arm = human.suggest(streams.human);
        step.executed_arm = *step.human_arm;
        break;
      }
      case InteractionMode::kTeleoperation: {
        const Arm h = human.suggest(streams.human);
        const RobotAction act = robot->act(t, h, streams.robot);
        step.human_arm = h;
        step.executed_arm = act.defers() ? h : *act.arm;
        break;
      }
      case InteractionMode::kTurnTaking: {
        const bool human_turn = (t % 2 == 1) == options.human_first;
        if (!human_turn) {
          const RobotAction act = robot->act(t, std::nullopt, streams.robot);
          if (!act.defers()) {
            step.executed_arm = *act.arm;
            break;
          }
        }
        step.human_arm = human.suggest(streams.human);
        step.executed_arm = *step.human_arm;
        break;
      }
      case InteractionMode::kPreemptive: {
        const RobotAction act = robot->act(t, std::nullopt, streams.robot);
        if (act.defers()) {
          step.human_arm = human.suggest(streams.human);
          step.executed_arm = *step.human_arm;
        } else {
          step.executed_arm = *act.arm;
        }
        break;
      }
    }
    if (step.executed_arm < 0 || step.executed_arm >= instance.n_arms()) {
      throw std::out_of_range("executed arm out of range");
    }
    step.reward = pull(instance, step.executed_arm, streams.environment);
    human.observe(step.executed_arm, step.reward);
    if (robot != nullptr) robot->observe_round(t, step.human_arm, step.executed_arm);
    if (mode == InteractionMode::kInverseSolo) step.reward = 0;
    traj.steps.push_back(step);
  }
  return traj;
}

}  // namespace amab
