#include "edgeprice/divergence.hpp"

#include <cmath>
#include <limits>

#include "edgeprice/errors.hpp"

namespace edgeprice {

std::string_view to_string(Divergence d) noexcept {
  return d == Divergence::bernoulli ? "bernoulli" : "exponential";
}

std::optional<Divergence> parse_divergence(std::string_view name) noexcept {
  if (name == "bernoulli") return Divergence::bernoulli;
  if (name == "exponential") return Divergence::exponential;
  return std::nullopt;
}

double bernoulli_kl(double u, double v) {
  if (!(u >= 0.0 && u <= 1.0) || !(v >= 0.0 && v <= 1.0)) {
    throw ContractViolation("bernoulli_kl: arguments must lie in [0, 1]");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double d = 0.0;
  if (u > 0.0) {
    if (v == 0.0) return kInf;
    d += u * std::log(u / v);
  }
  if (u < 1.0) {
    if (v == 1.0) return kInf;
    d += (1.0 - u) * std::log((1.0 - u) / (1.0 - v));
  }
  // Rounding can leave a tiny negative value near u == v.
  return d > 0.0 ? d : 0.0;
}

double exponential_kl(double u, double v) {
  if (!(u > 0.0) || !(v > 0.0)) {
    throw ContractViolation("exponential_kl: arguments must be positive");
  }
  const double ratio = v / u;
  const double d = ratio - 1.0 - std::log(ratio);
  return d > 0.0 ? d : 0.0;
}

double divergence(Divergence d, double u, double v) {
  return d == Divergence::bernoulli ? bernoulli_kl(u, v) : exponential_kl(u, v);
}

}  // namespace edgeprice
