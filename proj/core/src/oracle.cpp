#include "edgeprice/oracle.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "edgeprice/divergence.hpp"
#include "edgeprice/errors.hpp"

namespace edgeprice {

namespace {

double integrate_parent(const ValuationModel& model, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  auto density = [&model](double x) { return model.parent_density(x); };
  return gauss_kronrod<double, 31>::integrate(density, a, b, 15, 1e-12);
}

}  // namespace

double survival(const ValuationModel& model, double x, std::size_t product) {
  if (std::isnan(x)) throw ContractViolation("survival: x is NaN");
  if (model.kind() == ValuationKind::bernoulli) {
    if (x <= 0.0) return 1.0;
    if (x > 1.0) return 0.0;
    return model.success_probability(product);
  }
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  if (model.kind() == ValuationKind::uniform) return 1.0 - x;
  const double total = integrate_parent(model, 0.0, 1.0);
  return integrate_parent(model, x, 1.0) / total;
}

double expected_reward(const PriceVector& arm, const ValuationModel& model) {
  if (arm.prices.empty()) throw ContractViolation("expected_reward: empty arm");
  double sum = 0.0;
  for (std::size_t i = 0; i < arm.prices.size(); ++i) {
    sum += arm.prices[i] * survival(model, arm.prices[i], i);
  }
  return sum / static_cast<double>(arm.prices.size());
}

ArmMeanTable::ArmMeanTable(std::vector<double> means) : means_(std::move(means)) {
  if (means_.empty()) throw ContractViolation("mean table needs at least one arm");
  for (std::size_t k = 0; k < means_.size(); ++k) {
    if (!(means_[k] >= 0.0 && means_[k] <= 1.0)) {
      throw ContractViolation("arm mean outside [0, 1]");
    }
    if (means_[k] > means_[best_arm_]) best_arm_ = static_cast<int>(k);
  }
  gaps_.resize(means_.size());
  for (std::size_t k = 0; k < means_.size(); ++k) {
    gaps_[k] = means_[best_arm_] - means_[k];
  }
}

double ArmMeanTable::max_gap() const noexcept {
  return *std::max_element(gaps_.begin(), gaps_.end());
}

ArmMeanTable build_mean_table(std::span<const PriceVector> arms,
                              const ValuationModel& model) {
  std::vector<double> means;
  means.reserve(arms.size());
  for (const auto& arm : arms) means.push_back(expected_reward(arm, model));
  return ArmMeanTable(std::move(means));
}

RegretSeries pseudo_regret(std::span<const int> selections,
                           const ArmMeanTable& table,
                           std::span<const std::int64_t> checkpoints) {
  RegretSeries out;
  out.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  out.regret.reserve(checkpoints.size());
  const auto gaps = table.gaps();
  double cumulative = 0.0;
  std::int64_t t = 0;
  std::int64_t previous = 0;
  for (std::int64_t cp : checkpoints) {
    if (cp <= previous || cp > static_cast<std::int64_t>(selections.size())) {
      throw ContractViolation("checkpoints must be increasing and within the selections");
    }
    for (; t < cp; ++t) {
      const int arm = selections[t];
      if (arm < 0 || arm >= table.num_arms()) {
        throw ContractViolation("pseudo_regret: invalid arm id");
      }
      cumulative += gaps[arm];
    }
    out.regret.push_back(cumulative);
    previous = cp;
  }
  return out;
}

double kl_ucb_regret_coefficient(const ArmMeanTable& table) {
  const double best = table.best_mean();
  double sum = 0.0;
  for (double mu : table.means()) {
    if (!(mu < best)) continue;
    // d(mu, 1) is infinite for mu < 1, so such terms vanish.
    sum += (best - mu) / bernoulli_kl(mu, best);
  }
  return sum;
}

std::vector<std::int64_t> geometric_checkpoints(std::int64_t horizon) {
  if (horizon < 1) throw ContractViolation("horizon must be positive");
  std::vector<std::int64_t> out;
  for (std::int64_t t = 1; t < horizon; t *= 2) out.push_back(t);
  out.push_back(horizon);
  return out;
}

}  // namespace edgeprice
