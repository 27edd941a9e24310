#pragma once

#include <optional>
#include <string_view>

namespace edgeprice {

enum class Divergence { bernoulli, exponential };

std::string_view to_string(Divergence d) noexcept;
std::optional<Divergence> parse_divergence(std::string_view name) noexcept;

/// KL divergence between Bernoulli(u) and Bernoulli(v), with 0 log 0 = 0.
///
/// Requires u in [0, 1] and v in [0, 1]. Returns +infinity when v sits on a
/// boundary the mass of u cannot reach (v = 0 with u > 0, v = 1 with u < 1).
double bernoulli_kl(double u, double v);

/// Divergence for exponentially distributed rewards with means u and v:
/// v/u - 1 - log(v/u). Non-negative, zero iff u == v, increasing in v on
/// [u, inf). Both arguments must be positive.
double exponential_kl(double u, double v);

double divergence(Divergence d, double u, double v);

}  // namespace edgeprice
