#pragma once

#include <algorithm>

#include "sqnlab/core/errors.hpp"
#include "sqnlab/core/linalg.hpp"

namespace sqnlab {

enum class UpdateStatus {
  Updated,
  Skipped,     // step too small to carry curvature information
  Breakdown,   // result unusable; caller resets the curvature
};

struct DampedBfgsConfig {
  double delta = 1e-3;      // identity shift, also the spectral floor of every update
  double skip_tol = 1e-14;  // skip when ||s|| <= skip_tol * max(1, ||x||)

  void validate() const {
    if (!(delta > 0.0)) throw InvalidConfig("damped BFGS: delta must be positive");
    if (!(skip_tol >= 0.0)) throw InvalidConfig("damped BFGS: skip_tol must be nonnegative");
  }
};

/// True when s is too short, relative to the iterate, to update curvature.
inline bool is_degenerate_step(const Vector& s, double x_norm, double skip_tol) {
  return s.norm() <= skip_tol * std::max(1.0, x_norm);
}

/// Powell damping from the two curvature products s^T B s and s^T y_hat.
inline double damping_coefficient(double s_bs, double s_y) {
  if (!(s_bs > 0.0)) throw DegenerateStep("damping_coefficient: s^T B s must be positive");
  if (s_y >= 0.2 * s_bs) return 1.0;
  return 0.8 * s_bs / (s_bs - s_y);
}

inline double damping_coefficient(const Vector& s, const Vector& y_hat, const SpdMatrix& b) {
  require_same_dim(b.dim(), s.size(), "damping_coefficient");
  require_same_dim(s.size(), y_hat.size(), "damping_coefficient");
  const Vector bs = b.matrix() * s;
  return damping_coefficient(s.dot(bs), s.dot(y_hat));
}

struct DampedBfgsResult {
  SpdMatrix matrix;
  Vector r_hat;  // damped gradient difference actually used (empty when skipped)
  double theta = 1.0;
  UpdateStatus status = UpdateStatus::Updated;
};

/**
 * Stochastic damped BFGS update with identity shift:
 *
 *   r = theta y_hat + (1 - theta) B s
 *   B+ = B + r r^T / (s^T r) - B s s^T B / (s^T B s) + delta I
 *
 * y_hat = G_bar_{k+1} - G_k - delta s is supplied by the caller. Since
 * s^T r >= 0.2 s^T B s > 0 the rank-two part stays positive semidefinite, so
 * B+ >= delta I, and B+ s = r + delta s.
 */
inline DampedBfgsResult sdbfgs_update(const SpdMatrix& b, const Vector& s, const Vector& y_hat,
                                      const DampedBfgsConfig& cfg, double x_norm = 0.0) {
  require_same_dim(b.dim(), s.size(), "sdbfgs_update");
  require_same_dim(s.size(), y_hat.size(), "sdbfgs_update");
  if (is_degenerate_step(s, x_norm, cfg.skip_tol)) return {b, Vector(), 1.0, UpdateStatus::Skipped};

  const Vector bs = b.matrix() * s;
  const double s_bs = s.dot(bs);
  if (!(s_bs > 0.0)) return {b, Vector(), 1.0, UpdateStatus::Skipped};
  const double theta = damping_coefficient(s_bs, s.dot(y_hat));
  Vector r = theta * y_hat + (1.0 - theta) * bs;
  const double s_r = s.dot(r);

  Matrix next = b.matrix();
  next.noalias() += (r / s_r) * r.transpose();
  next.noalias() -= (bs / s_bs) * bs.transpose();
  next.diagonal().array() += cfg.delta;
  return {SpdMatrix(std::move(next)), std::move(r), theta, UpdateStatus::Updated};
}

}  // namespace sqnlab
