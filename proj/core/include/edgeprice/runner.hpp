#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edgeprice/market.hpp"
#include "edgeprice/oracle.hpp"
#include "edgeprice/policies.hpp"

namespace edgeprice {

/// Posted-price market: arms are price vectors, buyers draw valuations.
struct MarketSetup {
  ProductGrid grid{1, 1};
  PriceLevels levels = PriceLevels::evenly_spaced(20);
  ArmScheme scheme = ArmScheme::uniform_ladder;
  int num_arms = 20;
  std::uint64_t arm_seed = 0;
  ValuationModel valuation = ValuationModel::uniform();
  // Per-product capacity; std::nullopt entries (or no vector) are unlimited.
  std::optional<std::vector<std::optional<std::int64_t>>> capacity;
};

/// Synthetic instance where arm k pays Bernoulli(means[k]).
struct BernoulliArmsSetup {
  std::vector<double> means;
};

using EnvironmentSpec = std::variant<MarketSetup, BernoulliArmsSetup>;

struct ExperimentConfig {
  std::string name = "experiment";
  EnvironmentSpec environment = MarketSetup{};
  // horizon and num_arms inside each entry are overwritten from the experiment.
  std::vector<PolicyConfig> policies;
  std::int64_t horizon = 0;
  int episodes = 1;
  std::uint64_t master_seed = 0;
  // Empty means geometric_checkpoints(horizon).
  std::vector<std::int64_t> checkpoints;

  int num_arms() const;
  std::vector<std::int64_t> resolved_checkpoints() const;
  // Policies with horizon and num_arms filled in.
  std::vector<PolicyConfig> resolved_policies() const;
  // Throws ConfigError.
  void validate() const;
};

/// Immutable environment description: arms and their ground-truth means.
/// Shared read-only across concurrently running episodes.
class Environment {
 public:
  explicit Environment(EnvironmentSpec spec);

  const EnvironmentSpec& spec() const noexcept { return spec_; }
  int num_arms() const noexcept { return table_.num_arms(); }
  const ArmMeanTable& means() const noexcept { return table_; }
  // Empty for the Bernoulli-arms environment.
  std::span<const PriceVector> arms() const noexcept { return arms_; }

  /// Mutable per-episode state. Buyer randomness comes from its own stream,
  /// so the buyer sequence does not depend on which arms are played.
  class Episode {
   public:
    Episode(const Environment& env, std::uint64_t stream_key);

    // Posts arm `arm` to the next buyer and returns the reward.
    double play(int arm);
    bool exhausted() const noexcept;
    // Valuations of the most recent buyer (market environments only).
    std::span<const double> last_valuations() const noexcept { return valuations_; }

   private:
    const Environment* env_;
    Stream rng_;
    std::vector<double> valuations_;
    std::vector<std::uint8_t> consumption_;
    std::optional<CapacityLedger> ledger_;
  };

 private:
  EnvironmentSpec spec_;
  std::vector<PriceVector> arms_;
  ArmMeanTable table_;
};

struct EpisodeKeys {
  std::uint64_t environment = 0;
  std::uint64_t policy = 0;
};

/// Environment key depends on (master_seed, episode) only; the policy key
/// adds the policy label.
EpisodeKeys episode_keys(std::uint64_t master_seed, std::string_view policy_label,
                         std::int64_t episode);

struct EpisodeTrace {
  std::vector<int> selections;
  std::vector<double> rewards;
  // Rounds played when capacity ran out before the horizon.
  std::optional<std::int64_t> stop_round;
  double decision_seconds = 0.0;
  double median_round_seconds = 0.0;
  // Flattened per-round valuations, only when requested.
  std::vector<double> valuations;
};

struct EpisodeOptions {
  bool record_valuations = false;
};

/// Runs one episode: select, serve the buyer, settle, update, for up to
/// `horizon` rounds. Decision time covers select_arm and update only.
EpisodeTrace run_episode(const Environment& env, const PolicyConfig& policy,
                         std::int64_t horizon, const EpisodeKeys& keys,
                         const EpisodeOptions& options = {});

struct PolicyMetrics {
  std::string label;
  PolicyConfig config;
  // Per checkpoint, across episodes.
  std::vector<double> mean_cum_reward;
  std::vector<double> se_cum_reward;
  std::vector<double> mean_pseudo_regret;
  std::vector<double> se_pseudo_regret;
  std::vector<double> mean_realized_regret;
  std::vector<double> se_realized_regret;
  // Per arm, summed over episodes.
  std::vector<std::int64_t> selection_counts;
  // Per episode, at the final checkpoint; kept for paired comparisons.
  std::vector<double> episode_final_regret;
  std::vector<double> episode_final_reward;
  std::int64_t rounds_played = 0;
  // episodes * horizon - rounds_played.
  std::int64_t shortfall = 0;
  int episodes_stopped_early = 0;
  double total_decision_seconds = 0.0;
  double median_round_seconds = 0.0;
};

struct ExperimentMetrics {
  std::vector<std::int64_t> checkpoints;
  std::vector<double> arm_means;
  int best_arm = 0;
  int episodes = 0;
  std::int64_t horizon = 0;
  std::vector<PolicyMetrics> policies;
};

struct RunOptions {
  int parallelism = 1;
  // Called after each finished episode with (policy index, episodes done).
  std::function<void(std::size_t, int)> progress;
};

ExperimentMetrics run_experiment(const ExperimentConfig& config,
                                 const RunOptions& options = {});
ExperimentMetrics run_experiment(const ExperimentConfig& config,
                                 const Environment& env,
                                 const RunOptions& options = {});

}  // namespace edgeprice
