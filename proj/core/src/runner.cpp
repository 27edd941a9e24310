#include "edgeprice/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "edgeprice/errors.hpp"

namespace edgeprice {

namespace {

std::vector<PriceVector> make_arms(const EnvironmentSpec& spec) {
  if (const auto* market = std::get_if<MarketSetup>(&spec)) {
    market->valuation.check_grid(market->grid);
    return build_arm_set(market->grid, market->levels, market->num_arms,
                         market->scheme, market->arm_seed);
  }
  return {};
}

ArmMeanTable make_table(const EnvironmentSpec& spec,
                        const std::vector<PriceVector>& arms) {
  if (std::holds_alternative<MarketSetup>(spec)) {
    return build_mean_table(arms, std::get<MarketSetup>(spec).valuation);
  }
  const auto& means = std::get<BernoulliArmsSetup>(spec).means;
  if (means.empty()) throw ConfigError("bernoulli_arms needs at least one mean");
  for (double m : means) {
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("bernoulli_arms mean outside [0, 1]");
  }
  return ArmMeanTable(means);
}

double median(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Two-pass mean and standard error of the mean, in index order.
MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (*lo == *hi) {
    // Avoid rounding noise when every episode agrees.
    out.mean = *lo;
    return out;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  const double n = static_cast<double>(xs.size());
  out.se = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

// What a finished episode contributes to the aggregate.
struct EpisodeSummary {
  std::vector<double> cum_reward;      // per checkpoint
  std::vector<double> pseudo_regret;   // per checkpoint
  std::vector<double> realized_regret; // per checkpoint
  std::vector<std::int64_t> counts;    // per arm
  std::int64_t rounds = 0;
  bool stopped_early = false;
  double decision_seconds = 0.0;
  double median_round_seconds = 0.0;
};

EpisodeSummary summarize(const EpisodeTrace& trace, const ArmMeanTable& table,
                         std::span<const std::int64_t> checkpoints) {
  EpisodeSummary s;
  s.rounds = static_cast<std::int64_t>(trace.selections.size());
  s.stopped_early = trace.stop_round.has_value();
  s.decision_seconds = trace.decision_seconds;
  s.median_round_seconds = trace.median_round_seconds;
  s.counts.assign(table.num_arms(), 0);
  for (int arm : trace.selections) ++s.counts[arm];

  const auto gaps = table.gaps();
  const double best = table.best_mean();
  double reward = 0.0;
  double regret = 0.0;
  std::int64_t t = 0;
  for (std::int64_t cp : checkpoints) {
    // Past an early stop, values stay frozen at the stop round.
    const std::int64_t upto = std::min(cp, s.rounds);
    for (; t < upto; ++t) {
      reward += trace.rewards[t];
      regret += gaps[trace.selections[t]];
    }
    s.cum_reward.push_back(reward);
    s.pseudo_regret.push_back(regret);
    s.realized_regret.push_back(static_cast<double>(upto) * best - reward);
  }
  return s;
}

template <typename Fn>
void parallel_for(int count, int parallelism, Fn&& fn) {
  const int workers = std::max(1, std::min(parallelism, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(count);
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

int ExperimentConfig::num_arms() const {
  if (const auto* market = std::get_if<MarketSetup>(&environment)) {
    return market->num_arms;
  }
  return static_cast<int>(std::get<BernoulliArmsSetup>(environment).means.size());
}

std::vector<std::int64_t> ExperimentConfig::resolved_checkpoints() const {
  if (checkpoints.empty()) return geometric_checkpoints(horizon);
  return checkpoints;
}

std::vector<PolicyConfig> ExperimentConfig::resolved_policies() const {
  std::vector<PolicyConfig> out = policies;
  for (auto& p : out) {
    p.horizon = horizon;
    p.num_arms = num_arms();
    if (p.label.empty()) p.label = std::string(to_string(p.kind));
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw ConfigError("horizon must be positive");
  if (episodes < 1) throw ConfigError("episodes must be at least 1");
  const int k = num_arms();
  if (k < 1) throw ConfigError("the arm set is empty");
  if (horizon < k) {
    throw ConfigError("horizon (" + std::to_string(horizon) +
                      ") must be at least the number of arms (" +
                      std::to_string(k) + ")");
  }
  if (policies.empty()) throw ConfigError("at least one policy is required");
  std::vector<std::string> labels;
  for (const auto& p : resolved_policies()) {
    p.validate();
    if (std::find(labels.begin(), labels.end(), p.label) != labels.end()) {
      throw ConfigError("duplicate policy label '" + p.label + "'");
    }
    labels.push_back(p.label);
  }
  std::int64_t previous = 0;
  for (std::int64_t cp : checkpoints) {
    if (cp <= previous || cp > horizon) {
      throw ConfigError("checkpoints must be strictly increasing within [1, horizon]");
    }
    previous = cp;
  }
  if (const auto* market = std::get_if<MarketSetup>(&environment)) {
    market->valuation.check_grid(market->grid);
    if (market->capacity && market->capacity->size() != market->grid.num_products()) {
      throw ConfigError("capacity needs one entry per product (M*N = " +
                        std::to_string(market->grid.num_products()) + ")");
    }
  }
}

Environment::Environment(EnvironmentSpec spec)
    : spec_(std::move(spec)), arms_(make_arms(spec_)), table_(make_table(spec_, arms_)) {}

Environment::Episode::Episode(const Environment& env, std::uint64_t stream_key)
    : env_(&env), rng_(stream_key) {
  if (const auto* market = std::get_if<MarketSetup>(&env.spec_)) {
    const std::size_t n = market->grid.num_products();
    valuations_.resize(n);
    consumption_.resize(n);
    ledger_ = market->capacity ? CapacityLedger(*market->capacity)
                               : CapacityLedger::unlimited(n);
  }
}

double Environment::Episode::play(int arm) {
  if (arm < 0 || arm >= env_->num_arms()) {
    throw ContractViolation("play: arm id out of range");
  }
  if (const auto* market = std::get_if<MarketSetup>(&env_->spec_)) {
    sample_valuations(market->valuation, rng_, valuations_);
    const PriceVector& prices = env_->arms_[arm];
    purchase(valuations_, prices, consumption_);
    return settle_in_place(prices, consumption_, *ledger_);
  }
  return rng_.uniform() < env_->table_.mean(arm) ? 1.0 : 0.0;
}

bool Environment::Episode::exhausted() const noexcept {
  return ledger_ && ledger_->exhausted();
}

EpisodeKeys episode_keys(std::uint64_t master_seed, std::string_view policy_label,
                         std::int64_t episode) {
  const auto e = static_cast<std::uint64_t>(episode);
  return {derive_key({master_seed, hash_label("environment"), e}),
          derive_key({master_seed, hash_label("policy"), hash_label(policy_label), e})};
}

EpisodeTrace run_episode(const Environment& env, const PolicyConfig& policy_config,
                         std::int64_t horizon, const EpisodeKeys& keys,
                         const EpisodeOptions& options) {
  using Clock = std::chrono::steady_clock;
  if (horizon < 1) throw ContractViolation("run_episode: horizon must be positive");
  if (policy_config.num_arms != env.num_arms()) {
    throw ContractViolation("run_episode: policy and environment disagree on K");
  }
  auto policy = make_policy(policy_config);
  Environment::Episode episode(env, keys.environment);
  Stream policy_rng(keys.policy);

  EpisodeTrace trace;
  trace.selections.reserve(static_cast<std::size_t>(horizon));
  trace.rewards.reserve(static_cast<std::size_t>(horizon));
  std::vector<double> round_seconds;
  round_seconds.reserve(static_cast<std::size_t>(horizon));

  for (std::int64_t t = 0; t < horizon; ++t) {
    if (episode.exhausted()) {
      trace.stop_round = t;
      break;
    }
    const auto t0 = Clock::now();
    const int arm = policy->select_arm(policy_rng);
    const auto t1 = Clock::now();
    const double reward = episode.play(arm);
    if (options.record_valuations) {
      const auto v = episode.last_valuations();
      trace.valuations.insert(trace.valuations.end(), v.begin(), v.end());
    }
    const auto t2 = Clock::now();
    policy->update(arm, reward, policy_rng);
    const auto t3 = Clock::now();

    const double dt = std::chrono::duration<double>((t1 - t0) + (t3 - t2)).count();
    trace.decision_seconds += dt;
    round_seconds.push_back(dt);
    trace.selections.push_back(arm);
    trace.rewards.push_back(reward);
  }
  trace.median_round_seconds = median(round_seconds);
  return trace;
}

ExperimentMetrics run_experiment(const ExperimentConfig& config,
                                 const RunOptions& options) {
  config.validate();
  const Environment env(config.environment);
  return run_experiment(config, env, options);
}

ExperimentMetrics run_experiment(const ExperimentConfig& config,
                                 const Environment& env,
                                 const RunOptions& options) {
  config.validate();
  if (env.num_arms() != config.num_arms()) {
    throw ContractViolation("run_experiment: environment does not match config");
  }
  const auto checkpoints = config.resolved_checkpoints();
  const auto policies = config.resolved_policies();
  const auto& table = env.means();

  ExperimentMetrics metrics;
  metrics.checkpoints = checkpoints;
  metrics.arm_means.assign(table.means().begin(), table.means().end());
  metrics.best_arm = table.best_arm();
  metrics.episodes = config.episodes;
  metrics.horizon = config.horizon;

  std::mutex progress_mutex;
  for (std::size_t pi = 0; pi < policies.size(); ++pi) {
    const PolicyConfig& pc = policies[pi];
    std::vector<EpisodeSummary> summaries(config.episodes);
    int done = 0;
    parallel_for(config.episodes, options.parallelism, [&](int e) {
      const auto keys = episode_keys(config.master_seed, pc.label, e);
      const auto trace = run_episode(env, pc, config.horizon, keys);
      summaries[e] = summarize(trace, table, checkpoints);
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(pi, ++done);
      }
    });

    PolicyMetrics pm;
    pm.label = pc.label;
    pm.config = pc;
    pm.selection_counts.assign(env.num_arms(), 0);
    std::vector<double> column(config.episodes);
    std::vector<double> episode_medians;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      for (int e = 0; e < config.episodes; ++e) column[e] = summaries[e].cum_reward[c];
      auto r = mean_se(column);
      pm.mean_cum_reward.push_back(r.mean);
      pm.se_cum_reward.push_back(r.se);
      if (c + 1 == checkpoints.size()) pm.episode_final_reward = column;

      for (int e = 0; e < config.episodes; ++e) column[e] = summaries[e].pseudo_regret[c];
      r = mean_se(column);
      pm.mean_pseudo_regret.push_back(r.mean);
      pm.se_pseudo_regret.push_back(r.se);
      if (c + 1 == checkpoints.size()) pm.episode_final_regret = column;

      for (int e = 0; e < config.episodes; ++e) column[e] = summaries[e].realized_regret[c];
      r = mean_se(column);
      pm.mean_realized_regret.push_back(r.mean);
      pm.se_realized_regret.push_back(r.se);
    }
    for (const auto& s : summaries) {
      for (int k = 0; k < env.num_arms(); ++k) pm.selection_counts[k] += s.counts[k];
      pm.rounds_played += s.rounds;
      pm.episodes_stopped_early += s.stopped_early ? 1 : 0;
      pm.total_decision_seconds += s.decision_seconds;
      episode_medians.push_back(s.median_round_seconds);
    }
    pm.shortfall = static_cast<std::int64_t>(config.episodes) * config.horizon -
                   pm.rounds_played;
    pm.median_round_seconds = median(episode_medians);
    metrics.policies.push_back(std::move(pm));
  }
  return metrics;
}

}  // namespace edgeprice
