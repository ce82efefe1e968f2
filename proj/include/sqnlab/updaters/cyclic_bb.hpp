#pragma once

#include <algorithm>
#include <cstdint>

#include "sqnlab/core/errors.hpp"
#include "sqnlab/core/linalg.hpp"

namespace sqnlab {

enum class BbVariant {
  A,  // lambda = s^T y / ||y||^2
  B,  // lambda = ||s||^2 / s^T y
};

struct CbbConfig {
  std::uint64_t q = 5;  // cycle length
  double lambda_min = 1e-6;
  double lambda_max = 1e8;
  BbVariant variant = BbVariant::A;

  void validate() const {
    if (q < 1) throw InvalidConfig("cyclic BB: q must be at least 1");
    if (!(lambda_min > 0.0 && lambda_min < lambda_max)) throw InvalidConfig("cyclic BB: need 0 < lambda_min < lambda_max");
  }

  /// Bounds of (B_k^{-1} + zeta I) with zeta = 0.
  double spectrum_lower() const { return std::min(lambda_min, 1.0); }
  double spectrum_upper() const { return std::max(lambda_max, 1.0); }
};

/// B_k = lambda^{-1} I plus the bookkeeping for BB-step statistics.
struct CbbState {
  double lambda = 1.0;
  std::uint64_t k = 1;
  std::uint64_t bb_steps = 0;
  std::uint64_t fallback_steps = 0;

  bool operator==(const CbbState&) const = default;
};

/// Whether the update at iteration state.k consumes a curvature pair.
inline bool at_cycle_boundary(const CbbState& state, const CbbConfig& cfg) { return state.k % cfg.q == 0; }

inline double bb_value(const Vector& s, const Vector& y, BbVariant variant) {
  const double s_y = s.dot(y);
  return variant == BbVariant::A ? s_y / y.squaredNorm() : s.squaredNorm() / s_y;
}

/// Off-cycle update: lambda carries over.
inline CbbState scbb_advance(CbbState state) {
  ++state.k;
  return state;
}

/**
 * Stochastic cyclic BB update of lambda.
 *
 * Off the cycle boundary lambda is kept. At a boundary, a nonpositive s^T y
 * falls back to lambda = 1 (a plain gradient step), otherwise the BB value is
 * projected onto [lambda_min, lambda_max]. y is G_bar_{k+1} - G_k on one batch.
 */
inline CbbState scbb_update(CbbState state, const Vector& s, const Vector& y, const CbbConfig& cfg) {
  if (state.k < 1) throw InvalidConfig("scbb_update: iteration index starts at 1");
  if (!at_cycle_boundary(state, cfg)) return scbb_advance(state);
  require_same_dim(s.size(), y.size(), "scbb_update");
  const double s_y = s.dot(y);
  if (s_y > 0.0) {
    state.lambda = std::clamp(bb_value(s, y, cfg.variant), cfg.lambda_min, cfg.lambda_max);
    ++state.bb_steps;
  } else {
    state.lambda = 1.0;
    ++state.fallback_steps;
  }
  ++state.k;
  return state;
}

}  // namespace sqnlab
