#include "edgeprice/policies.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "edgeprice/errors.hpp"

namespace edgeprice {

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::kl_ucb: return "kl_ucb";
    case PolicyKind::moss: return "moss";
    case PolicyKind::ucb: return "ucb";
    case PolicyKind::thompson: return "thompson";
    case PolicyKind::epsilon_greedy: return "epsilon_greedy";
  }
  return "unknown";
}

std::string_view to_string(ExploitRule rule) noexcept {
  return rule == ExploitRule::empirical_mean ? "empirical_mean" : "ucb_index";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) noexcept {
  if (name == "kl_ucb") return PolicyKind::kl_ucb;
  if (name == "moss") return PolicyKind::moss;
  if (name == "ucb") return PolicyKind::ucb;
  if (name == "thompson") return PolicyKind::thompson;
  if (name == "epsilon_greedy") return PolicyKind::epsilon_greedy;
  return std::nullopt;
}

std::optional<ExploitRule> parse_exploit_rule(std::string_view name) noexcept {
  if (name == "empirical_mean") return ExploitRule::empirical_mean;
  if (name == "ucb_index") return ExploitRule::ucb_index;
  return std::nullopt;
}

bool uses_forced_exploration(PolicyKind kind) noexcept {
  return kind == PolicyKind::kl_ucb || kind == PolicyKind::moss ||
         kind == PolicyKind::ucb;
}

void PolicyConfig::validate() const {
  if (num_arms < 1) throw ConfigError("policy needs a non-empty arm set");
  if (horizon < 1) throw ConfigError("policy horizon must be positive");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be a finite value >= 0");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
  if (kind == PolicyKind::moss && horizon < num_arms) {
    throw ConfigError("moss needs horizon >= num_arms");
  }
}

double exploration_level(double t, double gamma) {
  if (!(t >= 1.0)) throw ContractViolation("exploration_level: t must be >= 1");
  const double log_t = std::log(t);
  if (gamma == 0.0 || log_t <= 0.0) return log_t;
  return log_t + gamma * std::max(std::log(log_t), 0.0);
}

namespace {

void check_stats(double mean, std::int64_t pulls) {
  if (pulls < 1) {
    throw ContractViolation("index requested for an arm that was never played");
  }
  if (!(mean >= 0.0 && mean <= 1.0)) {
    throw ContractViolation("empirical mean outside [0, 1]");
  }
}

// Whether the KL-UCB index of (mean, pulls) is at least `target`.
bool kl_reaches(double mean, std::int64_t pulls, double level, Divergence d,
                double target) {
  if (mean >= target) return true;
  if (d == Divergence::exponential && mean <= 0.0) return false;
  return static_cast<double>(pulls) * divergence(d, mean, target) <= level;
}

}  // namespace

double kl_ucb_bound(double mean, std::int64_t pulls, double level, Divergence d) {
  check_stats(mean, pulls);
  if (mean >= 1.0) return 1.0;
  if (d == Divergence::exponential && mean <= 0.0) return 0.0;
  const double n = static_cast<double>(pulls);
  auto feasible = [&](double q) { return n * divergence(d, mean, q) <= level; };
  if (feasible(1.0)) return 1.0;
  double lo = mean;
  double hi = 1.0;
  for (int i = 0; i < kKlUcbMaxIterations && hi - lo > kKlUcbTolerance; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double kl_ucb_index(const ArmStats& stats, double t, double gamma, Divergence d) {
  check_stats(stats.empirical_mean(), stats.pulls);
  return kl_ucb_bound(stats.empirical_mean(), stats.pulls,
                      exploration_level(t, gamma), d);
}

double moss_index(const ArmStats& stats, std::int64_t horizon, int num_arms) {
  check_stats(stats.empirical_mean(), stats.pulls);
  if (num_arms < 1 || horizon < num_arms) {
    throw ContractViolation("moss_index needs horizon >= num_arms >= 1");
  }
  const double n = static_cast<double>(stats.pulls);
  const double ratio = static_cast<double>(horizon) / (num_arms * n);
  const double bonus = ratio > 1.0 ? std::sqrt(std::log(ratio) / n) : 0.0;
  return stats.empirical_mean() + bonus;
}

double ucb_index(const ArmStats& stats, double t) {
  check_stats(stats.empirical_mean(), stats.pulls);
  if (!(t >= 1.0)) throw ContractViolation("ucb_index: t must be >= 1");
  return stats.empirical_mean() +
         std::sqrt(std::log(t) / static_cast<double>(stats.pulls));
}

Policy::Policy(PolicyConfig config) : config_(std::move(config)) {
  config_.validate();
  state_.arms.assign(config_.num_arms, ArmStats{});
}

int Policy::select_arm(Stream& rng) {
  if (uses_forced_exploration(config_.kind) && next_unplayed_ < config_.num_arms) {
    return next_unplayed_;
  }
  return choose(rng);
}

void Policy::update(int arm, double reward, Stream& rng) {
  if (arm < 0 || arm >= config_.num_arms) {
    throw ContractViolation("update: arm id out of range");
  }
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw ContractViolation("update: reward outside [0, 1]");
  }
  state_.arms[arm].record(reward);
  ++state_.round;
  while (next_unplayed_ < config_.num_arms &&
         state_.arms[next_unplayed_].pulls > 0) {
    ++next_unplayed_;
  }
  observe(arm, reward, rng);
}

namespace {

class KlUcbPolicy final : public Policy {
 public:
  using Policy::Policy;

 protected:
  // Exact argmax of the bisection indices, lowest id on ties. An arm is
  // bisected only if one divergence evaluation shows it can reach the
  // current best value.
  int choose(Stream&) override {
    const double level =
        exploration_level(static_cast<double>(state_.round + 1), config_.gamma);
    const auto& arms = state_.arms;
    int best = leader_;
    double best_value = bound(arms[best], level);
    for (int k = 0; k < config_.num_arms; ++k) {
      if (k == leader_) continue;
      const auto& a = arms[k];
      if (!kl_reaches(a.empirical_mean(), a.pulls, level, config_.divergence,
                      best_value)) {
        continue;
      }
      const double value = bound(a, level);
      if (value > best_value || (value == best_value && k < best)) {
        best = k;
        best_value = value;
      }
    }
    leader_ = best;
    return best;
  }

 private:
  double bound(const ArmStats& a, double level) const {
    return kl_ucb_bound(a.empirical_mean(), a.pulls, level, config_.divergence);
  }

  int leader_ = 0;
};

class MossPolicy final : public Policy {
 public:
  using Policy::Policy;

 protected:
  int choose(Stream&) override {
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < config_.num_arms; ++k) {
      const double v = moss_index(state_.arms[k], config_.horizon, config_.num_arms);
      if (v > best_value) {
        best = k;
        best_value = v;
      }
    }
    return best;
  }
};

int argmax_ucb(const PolicyState& state, int num_arms) {
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  const double t = static_cast<double>(state.round);
  for (int k = 0; k < num_arms; ++k) {
    const auto& a = state.arms[k];
    if (a.pulls == 0) return k;  // unplayed arms rank first
    const double v = ucb_index(a, t);
    if (v > best_value) {
      best = k;
      best_value = v;
    }
  }
  return best;
}

class UcbPolicy final : public Policy {
 public:
  using Policy::Policy;

 protected:
  int choose(Stream&) override { return argmax_ucb(state_, config_.num_arms); }
};

class ThompsonPolicy final : public Policy {
 public:
  explicit ThompsonPolicy(PolicyConfig config) : Policy(std::move(config)) {
    state_.alpha.assign(config_.num_arms, 1.0);
    state_.beta.assign(config_.num_arms, 1.0);
  }

 protected:
  int choose(Stream& rng) override {
    int best = 0;
    double best_value = -1.0;
    for (int k = 0; k < config_.num_arms; ++k) {
      std::gamma_distribution<double> ga(state_.alpha[k], 1.0);
      std::gamma_distribution<double> gb(state_.beta[k], 1.0);
      const double x = ga(rng);
      const double y = gb(rng);
      const double sample = x / (x + y);
      if (sample > best_value) {
        best = k;
        best_value = sample;
      }
    }
    return best;
  }

  // Binarize the [0, 1] reward so the Beta posterior stays conjugate.
  void observe(int arm, double reward, Stream& rng) override {
    const bool success = rng.uniform() < reward;
    state_.alpha[arm] += success ? 1.0 : 0.0;
    state_.beta[arm] += success ? 0.0 : 1.0;
  }
};

class EpsilonGreedyPolicy final : public Policy {
 public:
  using Policy::Policy;

 protected:
  int choose(Stream& rng) override {
    if (rng.uniform() < config_.epsilon) {
      return static_cast<int>(rng.below(static_cast<std::uint64_t>(config_.num_arms)));
    }
    if (config_.eg_exploit_rule == ExploitRule::ucb_index) {
      return argmax_ucb(state_, config_.num_arms);
    }
    int best = 0;
    double best_value = -1.0;
    for (int k = 0; k < config_.num_arms; ++k) {
      const double v = state_.arms[k].empirical_mean();
      if (v > best_value) {
        best = k;
        best_value = v;
      }
    }
    return best;
  }
};

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicyConfig& config) {
  switch (config.kind) {
    case PolicyKind::kl_ucb: return std::make_unique<KlUcbPolicy>(config);
    case PolicyKind::moss: return std::make_unique<MossPolicy>(config);
    case PolicyKind::ucb: return std::make_unique<UcbPolicy>(config);
    case PolicyKind::thompson: return std::make_unique<ThompsonPolicy>(config);
    case PolicyKind::epsilon_greedy:
      return std::make_unique<EpsilonGreedyPolicy>(config);
  }
  throw ConfigError("unknown policy kind");
}

}  // namespace edgeprice
