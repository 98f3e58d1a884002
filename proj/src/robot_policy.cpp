#include "amab/robot_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amab {

std::optional<Arm> ExplorationSchedule::arm_at(int t) const {
  if (kind_ == Kind::kNone || t < 1) return std::nullopt;
  const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(t))));
  if (m * m != t) return std::nullopt;
  return m % n_arms_;
}

int ExplorationSchedule::explore_count(int t) const {
  if (kind_ == Kind::kNone || t < 1) return 0;
  int m = static_cast<int>(std::sqrt(static_cast<double>(t)));
  while ((m + 1) * (m + 1) <= t) ++m;
  while (m * m > t) --m;
  return m;
}

void SuggestionTally::add(Arm a) {
  if (a < 0 || a >= static_cast<int>(counts_.size())) throw std::out_of_range("suggestion out of range");
  ++counts_[static_cast<std::size_t>(a)];
  ++total_;
}

Arm SuggestionTally::most_frequent(RandomStream& rng) const {
  if (total_ == 0) return rng.uniform_int(static_cast<int>(counts_.size()));
  const int hi = *std::max_element(counts_.begin(), counts_.end());
  int ties = 0;
  for (int c : counts_) ties += c == hi ? 1 : 0;
  int pick = ties == 1 ? 0 : rng.uniform_int(ties);
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] == hi && pick-- == 0) return static_cast<Arm>(i);
  }
  return 0;
}

Arm most_frequent_arm(std::span<const Arm> history, int n_arms, RandomStream& rng) {
  SuggestionTally tally(n_arms);
  for (Arm a : history) tally.add(a);
  return tally.most_frequent(rng);
}

int decode_wsls_reward(Arm previous_executed, Arm suggestion) {
  return suggestion == previous_executed ? 1 : 0;
}

int decode_communicative_reward(Arm suggestion) { return suggestion == 1 ? 1 : 0; }

// --- CopyRobot -------------------------------------------------------------

RobotAction CopyRobot::act(int /*t*/, std::optional<Arm> suggestion, RandomStream& rng) {
  if (suggestion) {
    tally_.add(*suggestion);
    counted_ = true;
    return RobotAction::execute(*suggestion);
  }
  return RobotAction::execute(tally_.most_frequent(rng));
}

void CopyRobot::observe_round(int /*t*/, std::optional<Arm> suggestion, Arm /*executed*/) {
  if (suggestion && !counted_) tally_.add(*suggestion);
  counted_ = false;
}

// --- MostFrequentArm -------------------------------------------------------

RobotAction MostFrequentArm::act(int /*t*/, std::optional<Arm> suggestion, RandomStream& rng) {
  if (suggestion) {
    tally_.add(*suggestion);
    counted_ = true;
  }
  return RobotAction::execute(tally_.most_frequent(rng));
}

void MostFrequentArm::observe_round(int /*t*/, std::optional<Arm> suggestion, Arm /*executed*/) {
  if (suggestion && !counted_) tally_.add(*suggestion);
  counted_ = false;
}

// --- GlieAssist ------------------------------------------------------------

RobotAction GlieAssist::act(int t, std::optional<Arm> suggestion, RandomStream& rng) {
  if (suggestion) {
    tally_.add(*suggestion);
    counted_ = true;
  }
  if (auto k = schedule_.arm_at(t)) return RobotAction::execute(*k);
  return RobotAction::execute(tally_.most_frequent(rng));
}

void GlieAssist::observe_round(int /*t*/, std::optional<Arm> suggestion, Arm /*executed*/) {
  if (suggestion && !counted_) tally_.add(*suggestion);
  counted_ = false;
}

// --- RewardDecoderRobot ----------------------------------------------------

RewardDecoderRobot::RewardDecoderRobot(Code code, std::unique_ptr<HumanPolicy> inner)
    : code_(code), inner_(std::move(inner)) {
  if (!inner_) throw std::invalid_argument("decoder robot needs an inner policy");
  inner_->reset();
}

std::string RewardDecoderRobot::name() const {
  return code_ == Code::kWinStayLoseShift ? "wsls_decoder" : "communicative_decoder";
}

void RewardDecoderRobot::decode(Arm suggestion) {
  if (!previous_executed_ || decoded_this_round_) return;
  const int r = code_ == Code::kWinStayLoseShift ? decode_wsls_reward(*previous_executed_, suggestion)
                                                  : decode_communicative_reward(suggestion);
  inner_->observe(*previous_executed_, r);
  decoded_.push_back(r);
  decoded_this_round_ = true;
}

RobotAction RewardDecoderRobot::act(int /*t*/, std::optional<Arm> suggestion, RandomStream& rng) {
  if (suggestion) decode(*suggestion);
  return RobotAction::execute(inner_->suggest(rng));
}

void RewardDecoderRobot::observe_round(int /*t*/, std::optional<Arm> suggestion, Arm executed) {
  if (suggestion) decode(*suggestion);
  previous_executed_ = executed;
  decoded_this_round_ = false;
}

// --- BeliefAssistant -------------------------------------------------------

BeliefAssistant::BeliefAssistant(const BetaPrior& prior, const HumanPolicy& model,
                                 BeliefAssistantConfig config, RandomStream particle_stream)
    : particles_(prior, model, config.filter, particle_stream),
      schedule_(config.schedule, prior.n_arms()),
      rule_(config.rule) {}

RobotAction BeliefAssistant::act(int t, std::optional<Arm> suggestion, RandomStream& rng) {
  if (suggestion) {
    particles_.reweight(*suggestion);
    consumed_ = true;
  }
  if (auto k = schedule_.arm_at(t)) return RobotAction::execute(*k);
  if (rule_ == ActionRule::kPosteriorMean) {
    return RobotAction::execute(sample_argmax(particles_.posterior_mean(), rng));
  }
  return RobotAction::execute(particles_.thompson_arm(rng));
}

void BeliefAssistant::observe_round(int /*t*/, std::optional<Arm> suggestion, Arm executed) {
  if (suggestion && !consumed_) particles_.reweight(*suggestion);
  consumed_ = false;
  particles_.propagate(executed);
}

// --- PreemptiveScripted ----------------------------------------------------

PreemptiveScripted::PreemptiveScripted(int n_arms, PhaseConfig phases, std::unique_ptr<ParticleSet> belief)
    : n_arms_(n_arms), phases_(phases), tally_(n_arms), belief_(std::move(belief)) {
  if (phases.explore_rounds < 0 || phases.observe_rounds < 0) {
    throw std::invalid_argument("phase lengths must be nonnegative");
  }
}

RobotAction PreemptiveScripted::act(int t, std::optional<Arm> /*suggestion*/, RandomStream& rng) {
  if (t <= phases_.explore_rounds) return RobotAction::execute((t - 1) % n_arms_);
  if (t <= phases_.explore_rounds + phases_.observe_rounds) return RobotAction::defer();
  if (belief_) return RobotAction::execute(sample_argmax(belief_->posterior_mean(), rng));
  return RobotAction::execute(tally_.most_frequent(rng));
}

void PreemptiveScripted::observe_round(int /*t*/, std::optional<Arm> suggestion, Arm executed) {
  if (suggestion) {
    tally_.add(*suggestion);
    if (belief_) belief_->reweight(*suggestion);
  }
  if (belief_) belief_->propagate(executed);
}

}  // namespace amab
