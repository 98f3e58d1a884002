#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "amab/bandit.hpp"
#include "amab/human_policy.hpp"
#include "amab/particle_filter.hpp"
#include "amab/random.hpp"

namespace amab {

// What the robot does in a round: execute an arm, or (preemptive mode) let
// the human act.
struct RobotAction {
  std::optional<Arm> arm;

  static RobotAction execute(Arm a) { return RobotAction{a}; }
  static RobotAction defer() { return RobotAction{std::nullopt}; }
  bool defers() const { return !arm.has_value(); }
};

// The robot never sees rewards. Its only inputs are the human's suggestion
// (when one is visible that round) and the arm that was executed; there is
// deliberately no reward parameter anywhere in this interface.
class RobotPolicy {
 public:
  virtual ~RobotPolicy() = default;

  virtual std::string name() const = 0;

  // `t` is the 1-based round. `suggestion` is absent when the human did not
  // propose an arm this round (turn-taking robot rounds, preemptive mode).
  virtual RobotAction act(int t, std::optional<Arm> suggestion, RandomStream& rng) = 0;

  // End-of-round update. `suggestion` is the human's arm if the robot saw one
  // this round (it may already have been passed to act()).
  virtual void observe_round(int t, std::optional<Arm> suggestion, Arm executed) = 0;
};

// Decaying disjoint exploration sequences. The default explores at perfect
// squares t = m*m, cycling arms by m mod N: every arm is visited infinitely
// often, and at most sqrt(t) of the first t rounds explore.
class ExplorationSchedule {
 public:
  enum class Kind { kNone, kSquares };

  ExplorationSchedule() = default;
  ExplorationSchedule(Kind kind, int n_arms) : kind_(kind), n_arms_(n_arms) {}

  static ExplorationSchedule squares(int n_arms) { return {Kind::kSquares, n_arms}; }
  static ExplorationSchedule none() { return {}; }

  Kind kind() const { return kind_; }
  std::optional<Arm> arm_at(int t) const;
  // Number of exploration rounds among 1..t.
  int explore_count(int t) const;

 private:
  Kind kind_ = Kind::kNone;
  int n_arms_ = 0;
};

// Suggestion counts with uniform tie breaking.
class SuggestionTally {
 public:
  explicit SuggestionTally(int n_arms) : counts_(static_cast<std::size_t>(n_arms), 0) {}
  void add(Arm a);
  int total() const { return total_; }
  std::span<const int> counts() const { return counts_; }
  // Argmax of counts, ties uniform; uniform over all arms before any
  // suggestion.
  Arm most_frequent(RandomStream& rng) const;

 private:
  std::vector<int> counts_;
  int total_ = 0;
};

// Argmax of suggestion counts over a history (ties uniform).
Arm most_frequent_arm(std::span<const Arm> history, int n_arms, RandomStream& rng);

// Reward implied by a WSLS human: 1 iff the suggestion repeats the previous
// executed arm. Only meaningful from round 2.
int decode_wsls_reward(Arm previous_executed, Arm suggestion);

// Reward implied by the purely communicative human: 1 iff it suggests arm 1.
int decode_communicative_reward(Arm suggestion);

class CopyRobot final : public RobotPolicy {
 public:
  explicit CopyRobot(int n_arms) : tally_(n_arms) {}
  std::string name() const override { return "copy"; }
  RobotAction act(int t, std::optional<Arm> suggestion, RandomStream& rng) override;
  void observe_round(int t, std::optional<Arm> suggestion, Arm executed) override;

 private:
  SuggestionTally tally_;
  bool counted_ = false;
};

class MostFrequentArm final : public RobotPolicy {
 public:
  explicit MostFrequentArm(int n_arms) : tally_(n_arms) {}
  std::string name() const override { return "most_frequent"; }
  RobotAction act(int t, std::optional<Arm> suggestion, RandomStream& rng) override;
  void observe_round(int t, std::optional<Arm> suggestion, Arm executed) override;

 private:
  SuggestionTally tally_;
  bool counted_ = false;
};

// Scheduled exploration, otherwise the human's most frequent suggestion.
class GlieAssist final : public RobotPolicy {
 public:
  GlieAssist(int n_arms, ExplorationSchedule schedule) : tally_(n_arms), schedule_(schedule) {}
  std::string name() const override { return "glie"; }
  RobotAction act(int t, std::optional<Arm> suggestion, RandomStream& rng) override;
  void observe_round(int t, std::optional<Arm> suggestion, Arm executed) override;

 private:
  SuggestionTally tally_;
  ExplorationSchedule schedule_;
  bool counted_ = false;
};

// Runs a standard-MAB policy on rewards decoded from the human's
// suggestions. Round 1 executes the inner policy's prior-only choice.
class RewardDecoderRobot final : public RobotPolicy {
 public:
  enum class Code { kWinStayLoseShift, kCommunicative };

  RewardDecoderRobot(Code code, std::unique_ptr<HumanPolicy> inner);
  std::string name() const override;
  RobotAction act(int t, std::optional<Arm> suggestion, RandomStream& rng) override;
  void observe_round(int t, std::optional<Arm> suggestion, Arm executed) override;

  // Rewards decoded so far, one per round from round 1 up to the last
  // decodable round.
  const std::vector<int>& decoded_rewards() const { return decoded_; }

 private:
  void decode(Arm suggestion);

  Code code_;
  std::unique_ptr<HumanPolicy> inner_;
  std::optional<Arm> previous_executed_;
  bool decoded_this_round_ = false;
  std::vector<int> decoded_;
};

enum class ActionRule { kThompson, kPosteriorMean };

struct BeliefAssistantConfig {
  ParticleFilterConfig filter;
  ExplorationSchedule::Kind schedule = ExplorationSchedule::Kind::kNone;
  ActionRule rule = ActionRule::kPosteriorMean;
};

// Model-based assistant: particle belief over (theta, human state) updated
// from suggestions; acts by the exploration schedule, else by the action
// rule on the belief.
class BeliefAssistant final : public RobotPolicy {
 public:
  BeliefAssistant(const BetaPrior& prior, const HumanPolicy& model, BeliefAssistantConfig config,
                  RandomStream particle_stream);
  std::string name() const override { return "belief"; }
  RobotAction act(int t, std::optional<Arm> suggestion, RandomStream& rng) override;
  void observe_round(int t, std::optional<Arm> suggestion, Arm executed) override;

  const ParticleSet& particles() const { return particles_; }

 private:
  ParticleSet particles_;
  ExplorationSchedule schedule_;
  ActionRule rule_;
  bool consumed_ = false;
};

struct PhaseConfig {
  int explore_rounds = 8;
  int observe_rounds = 12;
};

// Preemptive explore / observe / exploit script. Explore pulls arms
// round-robin, observe defers to the human, exploit pulls the belief argmax
// (posterior mean) or, without a belief, the most frequent observed
// suggestion.
class PreemptiveScripted final : public RobotPolicy {
 public:
  PreemptiveScripted(int n_arms, PhaseConfig phases, std::unique_ptr<ParticleSet> belief = nullptr);
  std::string name() const override { return "preemptive_scripted"; }
  RobotAction act(int t, std::optional<Arm> suggestion, RandomStream& rng) override;
  void observe_round(int t, std::optional<Arm> suggestion, Arm executed) override;

  const ParticleSet* belief() const { return belief_.get(); }

 private:
  int n_arms_;
  PhaseConfig phases_;
  SuggestionTally tally_;
  std::unique_ptr<ParticleSet> belief_;
};

}  // namespace amab
