#pragma once

#include <optional>

#include "sqnlab/core/errors.hpp"
#include "sqnlab/core/linalg.hpp"
#include "sqnlab/updaters/damped_bfgs.hpp"

namespace sqnlab {

/// Regularized (shifted) BFGS baseline.
struct ResConfig {
  double delta_hat = 1e-3;
  double gamma = 1e-4;  // constant safeguard zeta_k used with this updater
  double skip_tol = 1e-14;

  void validate() const {
    if (!(delta_hat > 0.0)) throw InvalidConfig("RES: delta_hat must be positive");
    if (!(gamma > 0.0)) throw InvalidConfig("RES: gamma must be positive");
  }
};

struct ResResult {
  Matrix matrix;                           // symmetrized; may be indefinite when status == Breakdown
  std::optional<Eigen::LLT<Matrix>> factor;  // present iff status == Updated
  UpdateStatus status = UpdateStatus::Updated;
};

/**
 * B+ = B + y y^T / (s^T y) - B s s^T B / (s^T B s) + delta_hat I with
 * y = G_bar_{k+1} - G_k - delta_hat s.
 *
 * Only strong convexity keeps this positive definite. An indefinite result,
 * or s^T y = 0, is returned with status Breakdown and the matrix left in place
 * for inspection.
 */
inline ResResult res_update(const SpdMatrix& b, const Vector& s, const Vector& y_hat, const ResConfig& cfg,
                            double x_norm = 0.0) {
  require_same_dim(b.dim(), s.size(), "res_update");
  require_same_dim(s.size(), y_hat.size(), "res_update");
  if (is_degenerate_step(s, x_norm, cfg.skip_tol)) return {b.matrix(), std::nullopt, UpdateStatus::Skipped};

  const Vector bs = b.matrix() * s;
  const double s_bs = s.dot(bs);
  const double s_y = s.dot(y_hat);
  if (!(s_bs > 0.0)) return {b.matrix(), std::nullopt, UpdateStatus::Skipped};
  if (s_y == 0.0 || !std::isfinite(s_y)) return {b.matrix(), std::nullopt, UpdateStatus::Breakdown};

  Matrix next = b.matrix();
  next.noalias() += (y_hat / s_y) * y_hat.transpose();
  next.noalias() -= (bs / s_bs) * bs.transpose();
  next.diagonal().array() += cfg.delta_hat;
  next = (0.5 * (next + next.transpose())).eval();

  Eigen::LLT<Matrix> llt(next);
  if (llt.info() != Eigen::Success || !next.allFinite())
    return {std::move(next), std::nullopt, UpdateStatus::Breakdown};
  return {std::move(next), std::move(llt), UpdateStatus::Updated};
}

}  // namespace sqnlab
