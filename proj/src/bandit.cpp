#include "amab/bandit.hpp"

#include <stdexcept>
#include <string>

namespace amab {

BetaPrior::BetaPrior(std::vector<ArmPrior> arms) : arms_(std::move(arms)) {
  if (arms_.size() < 2) throw std::invalid_argument("prior needs at least two arms");
  for (const auto& a : arms_) {
    if (a.known_mean) {
      if (*a.known_mean < 0.0 || *a.known_mean > 1.0) {
        throw std::invalid_argument("known arm mean must lie in [0, 1]");
      }
    } else if (!(a.alpha > 0.0) || !(a.beta > 0.0)) {
      throw std::invalid_argument("Beta prior parameters must be positive");
    }
  }
}

BetaPrior BetaPrior::uniform(int n_arms, double alpha, double beta) {
  return BetaPrior(std::vector<ArmPrior>(static_cast<std::size_t>(n_arms),
                                         ArmPrior{alpha, beta, std::nullopt}));
}

BetaPrior BetaPrior::one_and_a_half(double known_mean) {
  return BetaPrior({ArmPrior{1.0, 1.0, known_mean}, ArmPrior{1.0, 1.0, std::nullopt}});
}

BanditInstance::BanditInstance(std::vector<double> theta) : theta_(std::move(theta)) {
  if (theta_.size() < 2) throw std::invalid_argument("bandit needs at least two arms");
  for (std::size_t k = 0; k < theta_.size(); ++k) {
    const double v = theta_[k];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("theta must lie in [0, 1]");
    }
    if (k == 0 || v > best_mean_) {
      best_mean_ = v;
      best_arm_ = static_cast<Arm>(k);
    }
  }
}

BanditInstance sample_instance(const BetaPrior& prior, RandomStream& rng) {
  std::vector<double> theta;
  theta.reserve(prior.arms().size());
  for (const auto& a : prior.arms()) {
    theta.push_back(a.known_mean ? *a.known_mean : rng.beta(a.alpha, a.beta));
  }
  return BanditInstance(std::move(theta));
}

int pull(const BanditInstance& instance, Arm arm, RandomStream& rng) {
  if (arm < 0 || arm >= instance.n_arms()) {
    throw std::out_of_range("pull: arm " + std::to_string(arm) + " out of range");
  }
  return rng.uniform() < instance.mean(arm) ? 1 : 0;
}

RegretLedger::RegretLedger(const BanditInstance& instance)
    : instance_(instance), counts_(static_cast<std::size_t>(instance.n_arms()), 0) {}

void RegretLedger::record(Arm executed) {
  if (executed < 0 || executed >= instance_.n_arms()) {
    throw std::out_of_range("RegretLedger: executed arm out of range");
  }
  ++counts_[static_cast<std::size_t>(executed)];
  ++rounds_;
  regret_ += instance_.gap(executed);
}

double RegretLedger::recomputed_regret() const {
  double r = 0.0;
  for (Arm k = 0; k < instance_.n_arms(); ++k) {
    r += instance_.gap(k) * static_cast<double>(counts_[static_cast<std::size_t>(k)]);
  }
  return r;
}

double regret_of(const BanditInstance& instance, std::span<const Arm> executed) {
  RegretLedger ledger(instance);
  for (Arm a : executed) ledger.record(a);
  return ledger.recomputed_regret();
}

double regret_of(const BanditInstance& instance, const Trajectory& trajectory) {
  RegretLedger ledger(instance);
  for (const auto& s : trajectory.steps) ledger.record(s.executed_arm);
  return ledger.recomputed_regret();
}

std::vector<double> empirical_frequencies(std::span<const Arm> arms, int n_arms) {
  if (arms.empty()) throw std::invalid_argument("empirical_frequencies: empty sequence");
  if (n_arms < 1) throw std::invalid_argument("empirical_frequencies: n_arms < 1");
  std::vector<double> f(static_cast<std::size_t>(n_arms), 0.0);
  for (Arm a : arms) {
    if (a < 0 || a >= n_arms) throw std::out_of_range("empirical_frequencies: arm out of range");
    f[static_cast<std::size_t>(a)] += 1.0;
  }
  const double inv = 1.0 / static_cast<double>(arms.size());
  for (auto& v : f) v *= inv;
  return f;
}

}  // namespace amab
