#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgeprice/divergence.hpp"
#include "edgeprice/random.hpp"

namespace edgeprice {

struct ArmStats {
  std::int64_t pulls = 0;
  double reward_sum = 0.0;
  // Rounding error of reward_sum (Neumaier summation).
  double reward_carry = 0.0;

  void record(double reward) noexcept {
    ++pulls;
    const double t = reward_sum + reward;
    if (std::abs(reward_sum) >= std::abs(reward)) {
      reward_carry += (reward_sum - t) + reward;
    } else {
      reward_carry += (reward - t) + reward_sum;
    }
    reward_sum = t;
  }

  // Compensated sum / pulls; 0 for an unplayed arm.
  double empirical_mean() const noexcept {
    return pulls > 0 ? (reward_sum + reward_carry) / static_cast<double>(pulls) : 0.0;
  }
};

enum class PolicyKind { kl_ucb, moss, ucb, thompson, epsilon_greedy };

// What epsilon-greedy exploits when it does not explore.
enum class ExploitRule { empirical_mean, ucb_index };

std::string_view to_string(PolicyKind kind) noexcept;
std::string_view to_string(ExploitRule rule) noexcept;
std::optional<PolicyKind> parse_policy_kind(std::string_view name) noexcept;
std::optional<ExploitRule> parse_exploit_rule(std::string_view name) noexcept;

// True for the policies that start by playing every arm once.
bool uses_forced_exploration(PolicyKind kind) noexcept;

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kl_ucb;
  // Stream-key label; defaults to the kind name when empty.
  std::string label;
  double gamma = 0.0;
  double epsilon = 0.1;
  Divergence divergence = Divergence::bernoulli;
  std::int64_t horizon = 1;
  int num_arms = 1;
  ExploitRule eg_exploit_rule = ExploitRule::empirical_mean;

  std::string resolved_label() const {
    return label.empty() ? std::string(to_string(kind)) : label;
  }
  // Throws ConfigError on out-of-range parameters.
  void validate() const;
};

/// f(t) = log t + gamma * log log t, with the log log term floored at 0 so
/// the level stays finite for t < 3.
double exploration_level(double t, double gamma);

/// Largest q in [mean, 1] with pulls * d(mean, q) <= level, by bisection to
/// an absolute tolerance of kKlUcbTolerance (at most kKlUcbMaxIterations).
double kl_ucb_bound(double mean, std::int64_t pulls, double level, Divergence d);

inline constexpr double kKlUcbTolerance = 1e-9;
inline constexpr int kKlUcbMaxIterations = 100;

double kl_ucb_index(const ArmStats& stats, double t, double gamma,
                    Divergence d = Divergence::bernoulli);
double moss_index(const ArmStats& stats, std::int64_t horizon, int num_arms);
double ucb_index(const ArmStats& stats, double t);

struct PolicyState {
  std::vector<ArmStats> arms;
  std::int64_t round = 0;  // completed rounds
  // Beta posterior parameters; used by Thompson sampling only.
  std::vector<double> alpha;
  std::vector<double> beta;
};

/// A bandit policy over arms 0..K-1. One instance per episode.
class Policy {
 public:
  explicit Policy(PolicyConfig config);
  virtual ~Policy() = default;

  Policy(const Policy&) = delete;
  Policy& operator=(const Policy&) = delete;

  int select_arm(Stream& rng);
  void update(int arm, double reward, Stream& rng);

  const PolicyState& state() const noexcept { return state_; }
  const PolicyConfig& config() const noexcept { return config_; }
  int num_arms() const noexcept { return config_.num_arms; }

 protected:
  // Called once every arm is past forced exploration (if the kind uses it).
  virtual int choose(Stream& rng) = 0;
  virtual void observe(int /*arm*/, double /*reward*/, Stream& /*rng*/) {}

  PolicyConfig config_;
  PolicyState state_;
  int next_unplayed_ = 0;
};

std::unique_ptr<Policy> make_policy(const PolicyConfig& config);

}  // namespace edgeprice
