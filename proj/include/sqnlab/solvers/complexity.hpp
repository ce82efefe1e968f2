#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "sqnlab/core/errors.hpp"
#include "sqnlab/solvers/randomized_stopping.hpp"

namespace sqnlab {

/// m = ceil(min{N, max{1, (sigma/L) sqrt(N / D_tilde)}}) for an SFO budget N.
inline std::uint64_t complexity_batch_size(std::uint64_t budget, const TheoryConstants& c) {
  if (budget < 1) throw InvalidConfig("complexity_batch_size: budget must be positive");
  c.validate();
  const double n = static_cast<double>(budget);
  const double inner = std::max(1.0, (c.sigma / c.L) * std::sqrt(n / c.D_tilde));
  return static_cast<std::uint64_t>(std::ceil(std::min(n, inner)));
}

/**
 * SFO calls sufficient for E||grad f(x_R)||^2 <= eps:
 *
 *   N = ceil(max{C1^2/eps^2 + 4 C2/eps, sigma^2 / (L^2 D_tilde)})
 *   C1 = 4 sigma M^2 D_f / (m^2 sqrt(D_tilde)) + sigma L sqrt(D_tilde)
 *   C2 = 4 L M^2 D_f / m^2
 */
inline std::uint64_t sfo_budget(double eps, const TheoryConstants& c) {
  if (!(eps > 0.0)) throw InvalidConfig("sfo_budget: eps must be positive");
  c.validate();
  const double m2 = c.m * c.m;
  const double big_m2 = c.M * c.M;
  const double root_d = std::sqrt(c.D_tilde);
  const double c1 = 4.0 * c.sigma * big_m2 * c.D_f / (m2 * root_d) + c.sigma * c.L * root_d;
  const double c2 = 4.0 * c.L * big_m2 * c.D_f / m2;
  const double bound = std::max(c1 * c1 / (eps * eps) + 4.0 * c2 / eps, c.sigma * c.sigma / (c.L * c.L * c.D_tilde));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(bound)));
}

/// Iteration horizon ceil(budget / m) implied by an SFO budget for G_k.
inline std::uint64_t horizon_from_budget(std::uint64_t budget, std::uint64_t batch) {
  if (budget < 1 || batch < 1) throw InvalidConfig("horizon_from_budget: budget and batch must be positive");
  return (budget + batch - 1) / batch;
}

}  // namespace sqnlab
