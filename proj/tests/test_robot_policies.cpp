#include <doctest.h>

#include <cmath>
#include <memory>
#include <optional>
#include <type_traits>
#include <vector>

#include "amab/batch.hpp"
#include "amab/config.hpp"
#include "amab/episode.hpp"
#include "amab/gittins.hpp"
#include "amab/particle_filter.hpp"
#include "amab/robot_policy.hpp"

using namespace amab;

// The robot interface has no way to receive a reward.
static_assert(std::is_same_v<decltype(&RobotPolicy::act),
                             RobotAction (RobotPolicy::*)(int, std::optional<Arm>, RandomStream&)>);
static_assert(std::is_same_v<decltype(&RobotPolicy::observe_round),
                             void (RobotPolicy::*)(int, std::optional<Arm>, Arm)>);

namespace {

Trajectory play(InteractionMode mode, const BanditInstance& inst, HumanPolicy& human, RobotPolicy* robot, int horizon,
                std::uint64_t env_seed, std::uint64_t seed = 1) {
  EpisodeStreams s{RandomStream(env_seed), RandomStream(seed + 1), RandomStream(seed + 2)};
  return simulate_episode(mode, inst, human, robot, horizon, s);
}

std::vector<Arm> executed(const Trajectory& t) {
  std::vector<Arm> a;
  for (const auto& s : t.steps) a.push_back(s.executed_arm);
  return a;
}

}  // namespace

TEST_SUITE("robot_policies") {

TEST_CASE("copy robot") {
  CopyRobot r(4);
  RandomStream rng(1);
  CHECK(r.act(1, Arm{3}, rng).arm == 3);
  r.observe_round(1, Arm{3}, 3);
  CHECK(r.act(2, Arm{1}, rng).arm == 1);
  r.observe_round(2, Arm{1}, 1);
  r.act(3, Arm{1}, rng);
  r.observe_round(3, Arm{1}, 1);
  // no suggestion: most frequent so far
  CHECK(r.act(4, std::nullopt, rng).arm == 1);
}

TEST_CASE("teleoperation with the copy robot matches solo play") {
  const auto prior = BetaPrior::uniform(4);
  RandomStream irng(5);
  for (int e = 0; e < 50; ++e) {
    const auto inst = sample_instance(prior, irng);
    ThompsonSampling h1(prior, 1), h2(prior, 1);
    CopyRobot robot(4);
    const auto a = play(InteractionMode::kTeleoperation, inst, h1, &robot, 50, 100 + e);
    const auto b = play(InteractionMode::kSolo, inst, h2, nullptr, 50, 100 + e);
    CHECK(executed(a) == executed(b));
    CHECK(regret_of(inst, a) == regret_of(inst, b));
  }
}

TEST_CASE("most frequent arm") {
  RandomStream rng(2);
  CHECK(most_frequent_arm(std::vector<Arm>{2, 2, 1}, 4, rng) == 2);
  long zeros = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Arm a = most_frequent_arm(std::vector<Arm>{0, 1}, 4, rng);
    REQUIRE((a == 0 || a == 1));
    zeros += a == 0;
  }
  CHECK(std::abs(zeros / static_cast<double>(n) - 0.5) < 0.02);
}

TEST_CASE("GLIE assist explores on schedule, otherwise follows the tally") {
  const auto sched = ExplorationSchedule::squares(4);
  CHECK(sched.arm_at(1) == 1);
  CHECK(sched.arm_at(4) == 2);
  CHECK(sched.arm_at(9) == 3);
  CHECK(sched.arm_at(16) == 0);
  CHECK_FALSE(sched.arm_at(10).has_value());
  CHECK(sched.explore_count(100) == 10);

  GlieAssist g(4, sched);
  RandomStream rng(3);
  const std::vector<Arm> hist{1, 1, 0};
  int t = 1;
  for (Arm h : hist) {
    const auto a = g.act(t, h, rng);
    if (t == 1) CHECK(a.arm == 1);
    g.observe_round(t, h, *a.arm);
    ++t;
  }
  // t = 4 is a scheduled round for arm 2 even though 1 is most suggested
  CHECK(g.act(4, Arm{1}, rng).arm == 2);
  g.observe_round(4, Arm{1}, 2);
  CHECK(g.act(5, Arm{0}, rng).arm == 1);
}

TEST_CASE("WSLS and communicative decoding") {
  CHECK(decode_wsls_reward(2, 2) == 1);
  CHECK(decode_wsls_reward(2, 0) == 0);
  CHECK(decode_communicative_reward(1) == 1);
  CHECK(decode_communicative_reward(0) == 0);
}

TEST_CASE("decoded rewards equal the rewards the WSLS human saw") {
  const auto prior = BetaPrior::uniform(4);
  RandomStream irng(6);
  for (int e = 0; e < 100; ++e) {
    const auto inst = sample_instance(prior, irng);
    WinStayLoseShift h(4);
    RewardDecoderRobot robot(RewardDecoderRobot::Code::kWinStayLoseShift,
                             std::make_unique<GittinsIndexPolicy>(prior, shared_gittins_table(0.9)));
    const auto traj = play(InteractionMode::kTeleoperation, inst, h, &robot, 50, 300 + e);
    const auto& dec = robot.decoded_rewards();
    REQUIRE(dec.size() >= 49);
    for (std::size_t t = 0; t < 49; ++t) CHECK(dec[t] == traj.steps[t].reward);
  }
}

TEST_CASE("communicative decoding recovers every reward") {
  const auto prior = BetaPrior::uniform(4);
  const BanditInstance inst({0.3, 0.6, 0.2, 0.7});
  Communicative h(4);
  RewardDecoderRobot robot(RewardDecoderRobot::Code::kCommunicative, std::make_unique<ThompsonSampling>(prior, 1));
  const auto traj = play(InteractionMode::kTeleoperation, inst, h, &robot, 50, 9);
  const auto& dec = robot.decoded_rewards();
  REQUIRE(dec.size() >= 49);
  for (std::size_t t = 0; t < 49; ++t) CHECK(dec[t] == traj.steps[t].reward);
}

TEST_CASE("belief assistant's first move is uniform under a symmetric prior") {
  const auto prior = BetaPrior::uniform(4);
  EpsilonGreedy model(prior, 0.1);
  std::vector<long> c(4, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    BeliefAssistant robot(prior, model, {{32, 0.5}, ExplorationSchedule::Kind::kNone, ActionRule::kPosteriorMean},
                          RandomStream(static_cast<std::uint64_t>(i)));
    RandomStream rng(static_cast<std::uint64_t>(i) + 1000000);
    ++c[static_cast<std::size_t>(*robot.act(1, std::nullopt, rng).arm)];
  }
  for (long v : c) CHECK(std::abs(v / static_cast<double>(n) - 0.25) < 0.015);
}

TEST_CASE("belief assistant identifies the arm an optimal human keeps suggesting") {
  const auto prior = BetaPrior::uniform(4);
  EpsilonOptimal model(4, 0.0);
  BeliefAssistant robot(prior, model, {{2048, 0.5}, ExplorationSchedule::Kind::kNone, ActionRule::kPosteriorMean},
                        RandomStream(4));
  RandomStream rng(5);
  for (int t = 1; t <= 5; ++t) {
    const auto a = robot.act(t, Arm{2}, rng);
    robot.observe_round(t, Arm{2}, *a.arm);
  }
  CHECK(robot.particles().best_arm_posterior()[2] > 0.9);
}

TEST_CASE("particle posterior over the best arm matches closed-form Bayes") {
  // epsilon-optimal likelihood depends on theta only through the best arm, and
  // the prior puts 1/4 on each best arm.
  const auto prior = BetaPrior::uniform(4);
  const double eps = 0.5;
  EpsilonOptimal model(4, eps);
  ParticleSet set(prior, model, {10000, 0.5}, RandomStream(21));
  const std::vector<Arm> hs{1, 1, 3, 1, 0, 1, 2, 3, 1, 3};
  std::vector<double> logp(4, 0.0);
  for (Arm h : hs) {
    set.reweight(h);
    set.propagate(h);
    for (int j = 0; j < 4; ++j) logp[static_cast<std::size_t>(j)] += std::log((j == h ? 1 - eps : 0.0) + eps / 4);
  }
  double z = 0;
  for (double v : logp) z += std::exp(v);
  const auto post = set.best_arm_posterior();
  double tv = 0;
  for (int j = 0; j < 4; ++j) tv += 0.5 * std::abs(post[static_cast<std::size_t>(j)] - std::exp(logp[static_cast<std::size_t>(j)]) / z);
  CHECK(tv < 0.05);
}

TEST_CASE("collapsed particle filter matches exact Bayes for a WSLS human") {
  // With a WSLS model every reward is decoded, so the posterior of each arm is
  // Beta(1 + decoded successes, 1 + decoded failures).
  const auto prior = BetaPrior::uniform(4);
  WinStayLoseShift model(4);
  ParticleSet set(prior, model, {512, 0.5}, RandomStream(3));
  CHECK(set.collapsed());
  // suggestions 0,0,1,1,1,2 executed as suggested: rewards 1,0,1,1,0 on arms 0,0,1,1,1
  const std::vector<Arm> hs{0, 0, 1, 1, 1, 2};
  for (Arm h : hs) {
    set.reweight(h);
    set.propagate(h);
  }
  const auto m = set.posterior_mean();
  CHECK(m[0] == doctest::Approx(2.0 / 4.0).epsilon(1e-9));
  CHECK(m[1] == doctest::Approx(3.0 / 5.0).epsilon(1e-9));
  CHECK(m[3] == doctest::Approx(0.5).epsilon(1e-9));
  // arm 2 was executed on the last round; its reward is not yet decoded
  CHECK(std::abs(m[2] - 0.5) < 0.06);
}

TEST_CASE("preemptive script: round robin, observe, exploit") {
  PreemptiveScripted r(4, {8, 4});
  RandomStream rng(1);
  for (int t = 1; t <= 8; ++t) {
    const auto a = r.act(t, std::nullopt, rng);
    CHECK(a.arm == (t - 1) % 4);
    r.observe_round(t, std::nullopt, *a.arm);
  }
  const std::vector<Arm> hs{2, 2, 2, 1};
  for (int t = 9; t <= 12; ++t) {
    CHECK(r.act(t, std::nullopt, rng).defers());
    const Arm h = hs[static_cast<std::size_t>(t - 9)];
    r.observe_round(t, h, h);
  }
  for (int t = 13; t <= 20; ++t) CHECK(r.act(t, std::nullopt, rng).arm == 2);
}

TEST_CASE("robot decisions do not depend on rewards") {
  // The human ignores rewards, so changing the reward draws changes nothing the
  // robot can see; its executed arms must be identical.
  const auto prior = BetaPrior::uniform(4);
  const BanditInstance inst({0.2, 0.7, 0.4, 0.6});
  auto robots = [&]() {
    std::vector<std::unique_ptr<RobotPolicy>> v;
    v.push_back(std::make_unique<CopyRobot>(4));
    v.push_back(std::make_unique<MostFrequentArm>(4));
    v.push_back(std::make_unique<GlieAssist>(4, ExplorationSchedule::squares(4)));
    v.push_back(std::make_unique<BeliefAssistant>(prior, EpsilonGreedy(prior, 0.1),
                                                  BeliefAssistantConfig{{128, 0.5}}, RandomStream(8)));
    v.push_back(std::make_unique<BeliefAssistant>(
        prior, ThompsonSampling(prior, 1),
        BeliefAssistantConfig{{128, 0.5}, ExplorationSchedule::Kind::kSquares, ActionRule::kThompson}, RandomStream(8)));
    v.push_back(std::make_unique<RewardDecoderRobot>(RewardDecoderRobot::Code::kWinStayLoseShift,
                                                     std::make_unique<ThompsonSampling>(prior, 1)));
    return v;
  };
  for (auto mode : {InteractionMode::kTeleoperation, InteractionMode::kTurnTaking}) {
    auto a = robots();
    auto b = robots();
    for (std::size_t i = 0; i < a.size(); ++i) {
      CAPTURE(a[i]->name());
      EpsilonOptimal h1(4, 0.3), h2(4, 0.3);
      const auto ta = play(mode, inst, h1, a[i].get(), 50, 1111);
      const auto tb = play(mode, inst, h2, b[i].get(), 50, 2222);
      int differing_rewards = 0;
      for (std::size_t t = 0; t < ta.steps.size(); ++t) differing_rewards += ta.steps[t].reward != tb.steps[t].reward;
      REQUIRE(differing_rewards > 0);
      CHECK(executed(ta) == executed(tb));
    }
  }
}

TEST_CASE("WSLS with a decoder robot replays solo play of the inner policy") {
  ExperimentConfig assisted;
  assisted.human = {"wsls", nlohmann::json::object()};
  assisted.robot = {"wsls_decoder", {{"inner", {{"name", "gittins"}, {"params", {{"gamma", 0.9}}}}}}};
  assisted.seed = 77;
  ExperimentConfig solo = assisted;
  solo.mode = InteractionMode::kSolo;
  solo.human = {"gittins", {{"gamma", 0.9}}};
  solo.robot = {"none", nlohmann::json::object()};
  for (std::uint64_t e = 0; e < 300; ++e) {
    const auto a = run_episode(assisted, e);
    const auto b = run_episode(solo, e, StreamCoupling::kHumanOnRobotStream);
    CHECK(executed(a) == executed(b));
  }
}

}
