#pragma once

#include <optional>
#include <string_view>

#include "amab/bandit.hpp"
#include "amab/human_policy.hpp"
#include "amab/random.hpp"
#include "amab/robot_policy.hpp"

namespace amab {

enum class InteractionMode { kTeleoperation, kTurnTaking, kPreemptive, kSolo, kInverseSolo };

std::string_view to_string(InteractionMode mode);
std::optional<InteractionMode> parse_mode(std::string_view name);
bool is_solo(InteractionMode mode);

struct EpisodeStreams {
  RandomStream environment;
  RandomStream human;
  RandomStream robot;
};

struct ProtocolOptions {
  // Turn taking: the human acts on odd rounds (t = 1 first) when true.
  bool human_first = true;
};

// Plays one episode under `mode`. Per round:
//   teleoperation  human suggests, robot picks the executed arm (a deferral
//                  executes the suggestion), human sees (arm, reward), robot
//                  sees (suggestion, arm);
//   turn taking    on human rounds the suggestion is executed and the robot
//                  observes it; on robot rounds the robot acts unprompted;
//   preemptive     robot acts or defers; on deferral the human's arm is
//                  executed and revealed, otherwise no suggestion exists;
//   solo           the human plays alone (robot must be null);
//   inverse solo   solo, with rewards dropped from the returned record.
// The human is reset first (and bound to the instance if it reads theta).
Trajectory simulate_episode(InteractionMode mode, const BanditInstance& instance, HumanPolicy& human,
                            RobotPolicy* robot, int horizon, EpisodeStreams& streams,
                            ProtocolOptions options = {});

}  // namespace amab
