#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgeprice/market.hpp"

namespace edgeprice {

/// Pr[v >= x] for one product's valuation. Truncated kinds integrate the
/// parent density numerically (adaptive Gauss-Kronrod, relative error 1e-10).
double survival(const ValuationModel& model, double x, std::size_t product = 0);

/// Expected per-round reward of an arm:
/// sum over products of price * Pr[v >= price], divided by M*N.
double expected_reward(const PriceVector& arm, const ValuationModel& model);

/// Ground-truth arm means with the best arm and per-arm gaps.
class ArmMeanTable {
 public:
  // Best arm is the lowest id among the maxima.
  explicit ArmMeanTable(std::vector<double> means);

  std::span<const double> means() const noexcept { return means_; }
  std::span<const double> gaps() const noexcept { return gaps_; }
  double mean(int arm) const { return means_.at(arm); }
  double gap(int arm) const { return gaps_.at(arm); }
  int best_arm() const noexcept { return best_arm_; }
  double best_mean() const noexcept { return means_[best_arm_]; }
  double max_gap() const noexcept;
  int num_arms() const noexcept { return static_cast<int>(means_.size()); }

 private:
  std::vector<double> means_;
  std::vector<double> gaps_;
  int best_arm_ = 0;
};

ArmMeanTable build_mean_table(std::span<const PriceVector> arms,
                              const ValuationModel& model);

struct RegretSeries {
  std::vector<std::int64_t> checkpoints;
  std::vector<double> regret;
};

/// Cumulative pseudo-regret t * mu* - sum of mu over the first t selections,
/// sampled at each checkpoint (1-based round counts, strictly increasing,
/// each <= selections.size()).
RegretSeries pseudo_regret(std::span<const int> selections,
                           const ArmMeanTable& table,
                           std::span<const std::int64_t> checkpoints);

/// Asymptotic coefficient of log t in KL-UCB's regret upper bound for
/// Bernoulli rewards: sum over strictly suboptimal arms of gap / d(mu, mu*).
double kl_ucb_regret_coefficient(const ArmMeanTable& table);

/// Powers of two below the horizon, then the horizon itself.
std::vector<std::int64_t> geometric_checkpoints(std::int64_t horizon);

}  // namespace edgeprice
