#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "edgeprice/random.hpp"

namespace edgeprice {

/// VM types (M) offered at edge nodes (N). Product (i, j) is stored at the
/// flat index i * N + j, matching the order of the consumption vector.
class ProductGrid {
 public:
  ProductGrid(int num_vm_types, int num_edge_nodes);

  int num_vm_types() const noexcept { return num_vm_types_; }
  int num_edge_nodes() const noexcept { return num_edge_nodes_; }
  std::size_t num_products() const noexcept {
    return static_cast<std::size_t>(num_vm_types_) *
           static_cast<std::size_t>(num_edge_nodes_);
  }
  std::size_t product_index(int vm_type, int edge_node) const;

 private:
  int num_vm_types_;
  int num_edge_nodes_;
};

/// Discrete price options shared by every product, strictly increasing in (0, 1].
class PriceLevels {
 public:
  explicit PriceLevels(std::vector<double> levels);

  // {1/V, 2/V, ..., 1}.
  static PriceLevels evenly_spaced(int count);

  std::span<const double> values() const noexcept { return levels_; }
  std::size_t size() const noexcept { return levels_.size(); }
  double operator[](std::size_t i) const { return levels_[i]; }

 private:
  std::vector<double> levels_;
};

/// One arm: a posted price for every product.
struct PriceVector {
  int arm_id = 0;
  std::vector<double> prices;
};

enum class ArmScheme { uniform_ladder, random_grid };

std::string_view to_string(ArmScheme scheme) noexcept;
std::optional<ArmScheme> parse_arm_scheme(std::string_view name) noexcept;

/// Builds K distinct price vectors.
///
/// uniform_ladder gives arm k the k-th level on every product and needs K <= V.
/// random_grid draws each product's level independently from a stream keyed
/// by `seed`, rejecting duplicate vectors, and needs K <= V^(M*N). Throws
/// ConfigError naming the bound when K is too large.
std::vector<PriceVector> build_arm_set(const ProductGrid& grid,
                                       const PriceLevels& levels, int num_arms,
                                       ArmScheme scheme, std::uint64_t seed);

enum class ValuationKind {
  uniform,
  truncated_gaussian,
  truncated_exponential,
  bernoulli
};

std::string_view to_string(ValuationKind kind) noexcept;
std::optional<ValuationKind> parse_valuation_kind(std::string_view name) noexcept;

/// Distribution of a buyer's private valuation for one product, supported on
/// [0, 1]. The truncated kinds renormalize the parent density onto [0, 1];
/// nothing is clipped.
class ValuationModel {
 public:
  static ValuationModel uniform();
  static ValuationModel truncated_gaussian(double mean, double stddev);
  // Parent law is Exponential with the given mean (rate 1 / mean).
  static ValuationModel truncated_exponential(double mean);
  // One probability per product, or a single value shared by every product.
  static ValuationModel bernoulli(std::vector<double> success_probability);

  ValuationKind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }
  double stddev() const noexcept { return stddev_; }
  std::span<const double> success_probabilities() const noexcept {
    return success_probability_;
  }
  double success_probability(std::size_t product) const;

  // Density of the parent (untruncated) law. Zero for bernoulli.
  double parent_density(double x) const;

  // Throws ConfigError if per-product parameters do not fit the grid.
  void check_grid(const ProductGrid& grid) const;

 private:
  ValuationModel() = default;

  ValuationKind kind_ = ValuationKind::uniform;
  double mean_ = 0.5;
  double stddev_ = 0.0;
  std::vector<double> success_probability_;
};

/// Draws one valuation per product into `out`.
void sample_valuations(const ValuationModel& model, Stream& rng,
                       std::span<double> out);
std::vector<double> sample_valuations(const ValuationModel& model,
                                      const ProductGrid& grid, Stream& rng);

/// A buyer takes product (i, j) iff valuation >= price.
void purchase(std::span<const double> valuations, const PriceVector& arm,
              std::span<std::uint8_t> consumption);
std::vector<std::uint8_t> purchase(std::span<const double> valuations,
                                   const PriceVector& arm);

/// Remaining units per product; std::nullopt means unlimited.
class CapacityLedger {
 public:
  static CapacityLedger unlimited(std::size_t num_products);
  explicit CapacityLedger(std::vector<std::optional<std::int64_t>> remaining);

  std::size_t size() const noexcept { return remaining_.size(); }
  std::optional<std::int64_t> remaining(std::size_t product) const;
  std::int64_t sold(std::size_t product) const;
  bool can_sell(std::size_t product) const;
  void record_sale(std::size_t product);
  // True when every product is finite and at zero. An all-unlimited ledger
  // never exhausts.
  bool exhausted() const noexcept;

 private:
  std::vector<std::optional<std::int64_t>> remaining_;
  std::vector<std::int64_t> sold_;
};

struct Outcome {
  double reward = 0.0;  // raw_payment / num_products, in [0, 1]
  double raw_payment = 0.0;
  std::vector<std::uint8_t> consumption;
};

/// Charges the buyer for the products they take. A product with no stock
/// left is not sold (its consumption entry is forced to 0) before payment is
/// computed; every sale decrements the ledger.
Outcome settle(const PriceVector& arm, std::span<const std::uint8_t> consumption,
               CapacityLedger& ledger);

// In-place variant for the simulation loop; returns the reward.
double settle_in_place(const PriceVector& arm,
                       std::span<std::uint8_t> consumption,
                       CapacityLedger& ledger);

double buyer_utility(std::span<const double> valuations, const PriceVector& arm,
                     std::span<const std::uint8_t> consumption);

}  // namespace edgeprice
