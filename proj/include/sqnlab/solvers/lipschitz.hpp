#pragma once

#include <algorithm>
#include <cmath>

#include "sqnlab/core/linalg.hpp"
#include "sqnlab/core/rng.hpp"
#include "sqnlab/oracle/problem.hpp"

namespace sqnlab {

struct LipschitzProbeOptions {
  std::size_t points = 64;             // probe points on the segment [0, x_1]
  std::size_t samples_per_point = 4;
  std::size_t power_iterations = 30;
  double fd_step = 1e-6;
};

/**
 * Empirical Lipschitz constant of the per-sample gradients.
 *
 * At evenly spaced points of the segment from the origin to `start`, runs
 * power iteration on the sampled Hessian of several per-sample losses, using
 * central differences of G(., xi) for Hessian-vector products, and returns the
 * largest |eigenvalue| seen.
 */
template <StochasticProblem P>
double estimate_lipschitz(const P& problem, const Vector& start, SeededRng& rng, const LipschitzProbeOptions& opt = {}) {
  require_same_dim(problem.dim(), start.size(), "estimate_lipschitz");
  const Index n = problem.dim();
  const std::size_t points = std::max<std::size_t>(opt.points, 1);
  double best = 0.0;
  for (std::size_t j = 0; j < points; ++j) {
    const double t = points == 1 ? 1.0 : static_cast<double>(j) / static_cast<double>(points - 1);
    const Vector x = t * start;
    for (std::size_t s = 0; s < opt.samples_per_point; ++s) {
      const auto sample = problem.draw_sample(rng);
      Vector v(n);
      for (Index i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
      v.normalize();
      double rayleigh = 0.0;
      for (std::size_t it = 0; it < opt.power_iterations; ++it) {
        const Vector hv = (problem.stochastic_gradient(x + opt.fd_step * v, sample) -
                           problem.stochastic_gradient(x - opt.fd_step * v, sample)) /
                          (2.0 * opt.fd_step);
        rayleigh = v.dot(hv);
        const double norm = hv.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) break;
        v = hv / norm;
      }
      best = std::max(best, std::abs(rayleigh));
    }
  }
  return best;
}

}  // namespace sqnlab
