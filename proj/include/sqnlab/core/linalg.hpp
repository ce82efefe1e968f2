#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <variant>

#include "sqnlab/core/errors.hpp"

namespace sqnlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_same_dim(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " + std::to_string(expected) +
                            ", got " + std::to_string(got));
  }
}

/**
 * Dense symmetric matrix used as a Hessian approximation.
 *
 * Every construction re-symmetrizes with (B + B^T)/2. Positive definiteness is
 * checked lazily by factor(), which is what every solve goes through.
 */
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionMismatch("SpdMatrix: matrix is not square");
    symmetrize();
  }

  static SpdMatrix identity(Index n, double scale = 1.0) {
    return SpdMatrix(scale * Matrix::Identity(n, n));
  }

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }

  /// Cholesky factor; throws FactorizationFailed when not numerically positive definite.
  Eigen::LLT<Matrix> factor() const {
    Eigen::LLT<Matrix> llt(m_);
    if (llt.info() != Eigen::Success) throw FactorizationFailed("SpdMatrix: Cholesky factorization failed");
    return llt;
  }

  bool is_positive_definite() const {
    Eigen::LLT<Matrix> llt(m_);
    return llt.info() == Eigen::Success;
  }

 private:
  void symmetrize() { m_ = (0.5 * (m_ + m_.transpose())).eval(); }

  Matrix m_;
};

/// Solve with an existing factorization.
inline Vector spd_solve(const Eigen::LLT<Matrix>& llt, const Vector& g) {
  require_same_dim(llt.rows(), g.size(), "spd_solve");
  return llt.solve(g);
}

/// d = B^{-1} g by a fresh Cholesky factorization.
inline Vector spd_solve(const SpdMatrix& b, const Vector& g) {
  require_same_dim(b.dim(), g.size(), "spd_solve");
  return spd_solve(b.factor(), g);
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double min_eigenvalue(const SpdMatrix& b) { return min_eigenvalue(b.matrix()); }

/// B = lambda^{-1} I; the curvature form used by the cyclic Barzilai-Borwein updater.
struct ScaledIdentity {
  double lambda = 1.0;
};

/// Hessian approximation: dense SPD matrix or a scaled identity.
using CurvatureApprox = std::variant<SpdMatrix, ScaledIdentity>;

/**
 * (B^{-1} + zeta I) g.
 *
 * Dense: Cholesky solve plus the shift. Scaled identity: (lambda + zeta) g.
 */
inline Vector apply_inverse_plus_shift(const CurvatureApprox& b, double zeta, const Vector& g) {
  if (zeta < 0.0) throw InvalidConfig("apply_inverse_plus_shift: negative safeguard");
  if (const auto* dense = std::get_if<SpdMatrix>(&b)) {
    Vector d = spd_solve(*dense, g);
    d.noalias() += zeta * g;
    return d;
  }
  const double lambda = std::get<ScaledIdentity>(b).lambda;
  if (!(lambda > 0.0)) throw InvalidConfig("apply_inverse_plus_shift: scaled identity needs lambda > 0");
  return (lambda + zeta) * g;
}

}  // namespace sqnlab
