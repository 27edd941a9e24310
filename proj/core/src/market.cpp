#include "edgeprice/market.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "edgeprice/errors.hpp"

namespace edgeprice {

ProductGrid::ProductGrid(int num_vm_types, int num_edge_nodes)
    : num_vm_types_(num_vm_types), num_edge_nodes_(num_edge_nodes) {
  if (num_vm_types < 1 || num_edge_nodes < 1) {
    throw ConfigError("product grid needs at least one VM type and one edge node");
  }
}

std::size_t ProductGrid::product_index(int vm_type, int edge_node) const {
  if (vm_type < 0 || vm_type >= num_vm_types_ || edge_node < 0 ||
      edge_node >= num_edge_nodes_) {
    throw ContractViolation("product (vm_type, edge_node) out of range");
  }
  return static_cast<std::size_t>(vm_type) * num_edge_nodes_ + edge_node;
}

PriceLevels::PriceLevels(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw ConfigError("price levels must not be empty");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const double p = levels_[i];
    if (!(p > 0.0 && p <= 1.0)) {
      throw ConfigError("price level " + std::to_string(p) + " outside (0, 1]");
    }
    if (i > 0 && !(levels_[i - 1] < p)) {
      throw ConfigError("price levels must be strictly increasing");
    }
  }
}

PriceLevels PriceLevels::evenly_spaced(int count) {
  if (count < 1) throw ConfigError("price level count must be positive");
  std::vector<double> v(count);
  for (int k = 0; k < count; ++k) v[k] = static_cast<double>(k + 1) / count;
  return PriceLevels(std::move(v));
}

std::string_view to_string(ArmScheme scheme) noexcept {
  switch (scheme) {
    case ArmScheme::uniform_ladder: return "uniform_ladder";
    case ArmScheme::random_grid: return "random_grid";
  }
  return "unknown";
}

std::optional<ArmScheme> parse_arm_scheme(std::string_view name) noexcept {
  if (name == "uniform_ladder") return ArmScheme::uniform_ladder;
  if (name == "random_grid") return ArmScheme::random_grid;
  return std::nullopt;
}

std::vector<PriceVector> build_arm_set(const ProductGrid& grid,
                                       const PriceLevels& levels, int num_arms,
                                       ArmScheme scheme, std::uint64_t seed) {
  if (num_arms < 1) throw ConfigError("num_arms must be at least 1");
  const std::size_t products = grid.num_products();
  const std::size_t v = levels.size();
  std::vector<PriceVector> arms;
  arms.reserve(num_arms);

  if (scheme == ArmScheme::uniform_ladder) {
    if (static_cast<std::size_t>(num_arms) > v) {
      throw ConfigError("num_arms = " + std::to_string(num_arms) +
                        " exceeds the uniform_ladder bound V = " +
                        std::to_string(v));
    }
    for (int k = 0; k < num_arms; ++k) {
      arms.push_back({k, std::vector<double>(products, levels[k])});
    }
    return arms;
  }

  // V^(M*N) saturates quickly; compare in floating point.
  const double space = std::pow(static_cast<double>(v), static_cast<double>(products));
  if (static_cast<double>(num_arms) > space) {
    throw ConfigError("num_arms = " + std::to_string(num_arms) +
                      " exceeds the random_grid bound V^(M*N) = " +
                      std::to_string(static_cast<long long>(space)));
  }
  Stream rng(derive_key({seed, hash_label("arm_set")}));
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::size_t> pick(products);
  while (arms.size() < static_cast<std::size_t>(num_arms)) {
    for (auto& idx : pick) idx = static_cast<std::size_t>(rng.below(v));
    if (!seen.insert(pick).second) continue;
    PriceVector arm{static_cast<int>(arms.size()), std::vector<double>(products)};
    for (std::size_t p = 0; p < products; ++p) arm.prices[p] = levels[pick[p]];
    arms.push_back(std::move(arm));
  }
  return arms;
}

std::string_view to_string(ValuationKind kind) noexcept {
  switch (kind) {
    case ValuationKind::uniform: return "uniform";
    case ValuationKind::truncated_gaussian: return "truncated_gaussian";
    case ValuationKind::truncated_exponential: return "truncated_exponential";
    case ValuationKind::bernoulli: return "bernoulli";
  }
  return "unknown";
}

std::optional<ValuationKind> parse_valuation_kind(std::string_view name) noexcept {
  if (name == "uniform") return ValuationKind::uniform;
  if (name == "truncated_gaussian") return ValuationKind::truncated_gaussian;
  if (name == "truncated_exponential") return ValuationKind::truncated_exponential;
  if (name == "bernoulli") return ValuationKind::bernoulli;
  return std::nullopt;
}

ValuationModel ValuationModel::uniform() {
  ValuationModel m;
  m.kind_ = ValuationKind::uniform;
  m.mean_ = 0.5;
  m.stddev_ = std::sqrt(1.0 / 12.0);
  return m;
}

ValuationModel ValuationModel::truncated_gaussian(double mean, double stddev) {
  if (!std::isfinite(mean) || !(stddev > 0.0) || !std::isfinite(stddev)) {
    throw ConfigError("truncated_gaussian needs a finite mean and stddev > 0");
  }
  // Rejection onto [0, 1] must accept with non-negligible probability.
  if (mean < -4.0 * stddev || mean > 1.0 + 4.0 * stddev) {
    throw ConfigError("truncated_gaussian puts almost no mass on [0, 1]");
  }
  ValuationModel m;
  m.kind_ = ValuationKind::truncated_gaussian;
  m.mean_ = mean;
  m.stddev_ = stddev;
  return m;
}

ValuationModel ValuationModel::truncated_exponential(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw ConfigError("truncated_exponential needs mean > 0");
  }
  ValuationModel m;
  m.kind_ = ValuationKind::truncated_exponential;
  m.mean_ = mean;
  return m;
}

ValuationModel ValuationModel::bernoulli(std::vector<double> success_probability) {
  if (success_probability.empty()) {
    throw ConfigError("bernoulli valuations need at least one probability");
  }
  for (double p : success_probability) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("bernoulli probability outside [0, 1]");
    }
  }
  ValuationModel m;
  m.kind_ = ValuationKind::bernoulli;
  m.success_probability_ = std::move(success_probability);
  return m;
}

double ValuationModel::success_probability(std::size_t product) const {
  if (kind_ != ValuationKind::bernoulli) {
    throw ContractViolation("success_probability is defined for bernoulli only");
  }
  if (success_probability_.size() == 1) return success_probability_[0];
  if (product >= success_probability_.size()) {
    throw ContractViolation("product index beyond bernoulli parameters");
  }
  return success_probability_[product];
}

double ValuationModel::parent_density(double x) const {
  switch (kind_) {
    case ValuationKind::uniform:
      return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
    case ValuationKind::truncated_gaussian: {
      const double z = (x - mean_) / stddev_;
      return std::exp(-0.5 * z * z);
    }
    case ValuationKind::truncated_exponential:
      return x < 0.0 ? 0.0 : std::exp(-x / mean_);
    case ValuationKind::bernoulli:
      return 0.0;
  }
  return 0.0;
}

void ValuationModel::check_grid(const ProductGrid& grid) const {
  if (kind_ == ValuationKind::bernoulli && success_probability_.size() != 1 &&
      success_probability_.size() != grid.num_products()) {
    throw ConfigError("bernoulli valuation needs 1 or M*N = " +
                      std::to_string(grid.num_products()) + " probabilities");
  }
}

void sample_valuations(const ValuationModel& model, Stream& rng,
                       std::span<double> out) {
  switch (model.kind()) {
    case ValuationKind::uniform:
      for (double& v : out) v = rng.uniform();
      return;
    case ValuationKind::truncated_gaussian: {
      std::normal_distribution<double> normal(model.mean(), model.stddev());
      for (double& v : out) {
        double x;
        do {
          x = normal(rng);
        } while (x < 0.0 || x > 1.0);
        v = x;
      }
      return;
    }
    case ValuationKind::truncated_exponential: {
      // Inverse CDF of the density proportional to exp(-x / mean) on [0, 1].
      const double mass = -std::expm1(-1.0 / model.mean());
      for (double& v : out) {
        v = -model.mean() * std::log1p(-rng.uniform() * mass);
      }
      return;
    }
    case ValuationKind::bernoulli: {
      const auto probs = model.success_probabilities();
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double p = probs.size() == 1 ? probs[0] : probs[i];
        out[i] = rng.uniform() < p ? 1.0 : 0.0;
      }
      return;
    }
  }
}

std::vector<double> sample_valuations(const ValuationModel& model,
                                      const ProductGrid& grid, Stream& rng) {
  std::vector<double> v(grid.num_products());
  sample_valuations(model, rng, v);
  return v;
}

void purchase(std::span<const double> valuations, const PriceVector& arm,
              std::span<std::uint8_t> consumption) {
  if (valuations.size() != arm.prices.size() ||
      consumption.size() != arm.prices.size()) {
    throw ContractViolation("purchase: valuation and price vectors differ in length");
  }
  for (std::size_t i = 0; i < valuations.size(); ++i) {
    consumption[i] = valuations[i] >= arm.prices[i] ? 1 : 0;
  }
}

std::vector<std::uint8_t> purchase(std::span<const double> valuations,
                                   const PriceVector& arm) {
  std::vector<std::uint8_t> c(arm.prices.size());
  purchase(valuations, arm, c);
  return c;
}

CapacityLedger CapacityLedger::unlimited(std::size_t num_products) {
  return CapacityLedger(std::vector<std::optional<std::int64_t>>(num_products));
}

CapacityLedger::CapacityLedger(std::vector<std::optional<std::int64_t>> remaining)
    : remaining_(std::move(remaining)), sold_(remaining_.size(), 0) {
  for (const auto& r : remaining_) {
    if (r && *r < 0) throw ConfigError("capacity must be non-negative");
  }
}

std::optional<std::int64_t> CapacityLedger::remaining(std::size_t product) const {
  return remaining_.at(product);
}

std::int64_t CapacityLedger::sold(std::size_t product) const {
  return sold_.at(product);
}

bool CapacityLedger::can_sell(std::size_t product) const {
  const auto& r = remaining_.at(product);
  return !r || *r > 0;
}

void CapacityLedger::record_sale(std::size_t product) {
  auto& r = remaining_.at(product);
  if (r) {
    if (*r == 0) throw ContractViolation("sale recorded against an empty product");
    --*r;
  }
  ++sold_[product];
}

bool CapacityLedger::exhausted() const noexcept {
  if (remaining_.empty()) return false;
  return std::all_of(remaining_.begin(), remaining_.end(),
                     [](const auto& r) { return r && *r == 0; });
}

double settle_in_place(const PriceVector& arm,
                       std::span<std::uint8_t> consumption,
                       CapacityLedger& ledger) {
  if (consumption.size() != arm.prices.size() ||
      ledger.size() != arm.prices.size()) {
    throw ContractViolation("settle: consumption, prices and ledger differ in length");
  }
  double payment = 0.0;
  for (std::size_t i = 0; i < consumption.size(); ++i) {
    if (!consumption[i]) continue;
    if (!ledger.can_sell(i)) {
      consumption[i] = 0;
      continue;
    }
    ledger.record_sale(i);
    payment += arm.prices[i];
  }
  return payment / static_cast<double>(arm.prices.size());
}

Outcome settle(const PriceVector& arm, std::span<const std::uint8_t> consumption,
               CapacityLedger& ledger) {
  Outcome out;
  out.consumption.assign(consumption.begin(), consumption.end());
  out.reward = settle_in_place(arm, out.consumption, ledger);
  out.raw_payment = 0.0;
  for (std::size_t i = 0; i < out.consumption.size(); ++i) {
    if (out.consumption[i]) out.raw_payment += arm.prices[i];
  }
  return out;
}

double buyer_utility(std::span<const double> valuations, const PriceVector& arm,
                     std::span<const std::uint8_t> consumption) {
  if (valuations.size() != arm.prices.size() ||
      consumption.size() != arm.prices.size()) {
    throw ContractViolation("buyer_utility: vector lengths differ");
  }
  double u = 0.0;
  for (std::size_t i = 0; i < valuations.size(); ++i) {
    if (consumption[i]) u += valuations[i] - arm.prices[i];
  }
  return u;
}

}  // namespace edgeprice
