#pragma once

#include <cstdint>
#include <vector>

#include "sqnlab/core/errors.hpp"
#include "sqnlab/core/linalg.hpp"
#include "sqnlab/core/rng.hpp"
#include "sqnlab/oracle/problem.hpp"

namespace sqnlab {

/// Everything needed to regenerate a quadratic instance.
struct QuadraticSpec {
  Index n = 500;
  std::vector<double> spectrum_set{0.1, 1.0};
  double noise = 0.1;  // half-width of the uniform multiplicative perturbation
  std::uint64_t seed = 1;
};

/**
 * f(x) = E[ 1/2 x^T (A + A diag(xi)) x - b^T x ],  xi ~ U[-noise, noise]^n.
 *
 * A is diagonal with entries drawn from a finite set, b ~ U[0,1]^n. With
 * noise = 0 the oracle is exact.
 */
class QuadraticProblem {
 public:
  using Sample = Vector;  // the perturbation xi

  QuadraticProblem(Vector diag_a, Vector b, double noise = 0.1)
      : diag_a_(std::move(diag_a)), b_(std::move(b)), noise_(noise) {
    require_same_dim(diag_a_.size(), b_.size(), "QuadraticProblem");
    if (noise_ < 0.0) throw InvalidConfig("QuadraticProblem: noise must be nonnegative");
    if ((diag_a_.array() <= 0.0).any()) throw InvalidConfig("QuadraticProblem: diagonal must be positive");
  }

  static QuadraticProblem generate(const QuadraticSpec& spec) {
    if (spec.n < 1) throw InvalidConfig("quadratic: n must be positive");
    if (spec.spectrum_set.empty()) throw InvalidConfig("quadratic: spectrum set is empty");
    for (double v : spec.spectrum_set)
      if (!(v > 0.0)) throw InvalidConfig("quadratic: spectrum set entries must be positive");
    SeededRng rng(spec.seed, 0);
    Vector a(spec.n), b(spec.n);
    for (Index i = 0; i < spec.n; ++i) a[i] = spec.spectrum_set[rng.index(spec.spectrum_set.size())];
    for (Index i = 0; i < spec.n; ++i) b[i] = rng.uniform(0.0, 1.0);
    return QuadraticProblem(std::move(a), std::move(b), spec.noise);
  }

  Index dim() const noexcept { return diag_a_.size(); }
  const Vector& diag() const noexcept { return diag_a_; }
  const Vector& rhs() const noexcept { return b_; }
  double noise() const noexcept { return noise_; }

  Sample draw_sample(SeededRng& rng) const {
    Vector xi(dim());
    if (noise_ == 0.0) {
      xi.setZero();
      return xi;
    }
    for (Index i = 0; i < dim(); ++i) xi[i] = rng.uniform(-noise_, noise_);
    return xi;
  }

  Vector stochastic_gradient(const Vector& x, const Sample& xi) const {
    return (diag_a_.array() * (1.0 + xi.array()) * x.array() - b_.array()).matrix();
  }

  double sample_loss(const Vector& x, const Sample& xi) const {
    return 0.5 * (diag_a_.array() * (1.0 + xi.array()) * x.array().square()).sum() - b_.dot(x);
  }

  /// A x - b; the perturbation has zero mean.
  Vector exact_gradient(const Vector& x) const {
    require_same_dim(dim(), x.size(), "exact_gradient");
    return (diag_a_.array() * x.array() - b_.array()).matrix();
  }

  Vector full_gradient(const Vector& x) const { return exact_gradient(x); }

  double objective(const Vector& x) const { return 0.5 * (diag_a_.array() * x.array().square()).sum() - b_.dot(x); }

  /// x* = A^{-1} b of the unperturbed problem.
  Vector stationary_point() const { return (b_.array() / diag_a_.array()).matrix(); }

  Vector initial_point() const { return Vector::Zero(dim()); }

  /// E||G(x,xi) - grad f(x)||^2 = (noise^2 / 3) ||A x||^2 for the uniform law.
  double gradient_variance(const Vector& x) const {
    return noise_ * noise_ / 3.0 * (diag_a_.array() * x.array()).matrix().squaredNorm();
  }

  /// Lipschitz constant of the gradient of f.
  double lipschitz_bound() const { return diag_a_.maxCoeff(); }

 private:
  Vector diag_a_;
  Vector b_;
  double noise_;
};

inline Vector exact_gradient_quadratic(const QuadraticProblem& p, const Vector& x) { return p.exact_gradient(x); }

}  // namespace sqnlab
