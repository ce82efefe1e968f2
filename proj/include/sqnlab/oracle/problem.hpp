#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <vector>

#include "sqnlab/core/errors.hpp"
#include "sqnlab/core/linalg.hpp"
#include "sqnlab/core/rng.hpp"

namespace sqnlab {

/**
 * Stochastic first-order oracle.
 *
 * A problem draws i.i.d. samples xi from its own distribution and returns
 * unbiased gradient samples G(x, xi) of f at x.
 */
template <class P>
concept StochasticProblem = requires(const P& p, const Vector& x, const typename P::Sample& s, SeededRng& rng) {
  typename P::Sample;
  { p.dim() } -> std::convertible_to<Index>;
  { p.draw_sample(rng) } -> std::same_as<typename P::Sample>;
  { p.stochastic_gradient(x, s) } -> std::convertible_to<Vector>;
};

/// Per-sample loss F(x, xi), needed for finite-difference validation.
template <class P>
concept HasSampleLoss = StochasticProblem<P> && requires(const P& p, const Vector& x, const typename P::Sample& s) {
  { p.sample_loss(x, s) } -> std::convertible_to<double>;
};

/// Exact or estimated full gradient used for reporting, never for stepping.
template <class P>
concept HasFullGradient = requires(const P& p, const Vector& x) {
  { p.full_gradient(x) } -> std::convertible_to<Vector>;
};

/// Problems with a known stationary point support relative-distance termination.
template <class P>
concept HasStationaryPoint = requires(const P& p) {
  { p.stationary_point() } -> std::convertible_to<Vector>;
};

/// Tally of individual G(x, xi) evaluations.
struct OracleCounter {
  std::uint64_t n_sfo = 0;
};

template <class S>
struct SampleBatch {
  std::vector<S> samples;

  std::size_t size() const noexcept { return samples.size(); }
};

template <StochasticProblem P>
SampleBatch<typename P::Sample> draw_batch(const P& problem, std::size_t m, SeededRng& rng) {
  if (m == 0) throw InvalidConfig("draw_batch: batch size must be positive");
  SampleBatch<typename P::Sample> batch;
  batch.samples.reserve(m);
  for (std::size_t i = 0; i < m; ++i) batch.samples.push_back(problem.draw_sample(rng));
  return batch;
}

/// (1/m) sum_i G(x, xi_i); advances the counter by m.
template <StochasticProblem P>
Vector minibatch_gradient(const P& problem, const Vector& x, const SampleBatch<typename P::Sample>& batch,
                          OracleCounter& counter) {
  require_same_dim(problem.dim(), x.size(), "minibatch_gradient");
  if (batch.size() == 0) throw InvalidConfig("minibatch_gradient: empty batch");
  Vector g = Vector::Zero(x.size());
  for (const auto& s : batch.samples) g += problem.stochastic_gradient(x, s);
  g /= static_cast<double>(batch.size());
  counter.n_sfo += batch.size();
  return g;
}

/**
 * Gradient at the new iterate on the batch that produced G_k.
 *
 * Reusing the samples makes G_bar_{k+1} - G_k a curvature measurement of a
 * single sampled function rather than a difference of two noise draws.
 */
template <StochasticProblem P>
Vector gradient_same_batch(const P& problem, const Vector& x_next, const SampleBatch<typename P::Sample>& batch,
                           OracleCounter& counter) {
  return minibatch_gradient(problem, x_next, batch, counter);
}

/**
 * Largest componentwise deviation between the analytic per-sample gradient and
 * central differences of the per-sample loss, scaled by max(1, |g|_inf).
 */
template <HasSampleLoss P>
double finite_difference_check(const P& problem, const Vector& x, const typename P::Sample& sample, double h) {
  require_same_dim(problem.dim(), x.size(), "finite_difference_check");
  if (!(h > 0.0)) throw InvalidConfig("finite_difference_check: step must be positive");
  const Vector g = problem.stochastic_gradient(x, sample);
  Vector probe = x;
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + h;
    const double up = problem.sample_loss(probe, sample);
    probe[i] = xi - h;
    const double down = problem.sample_loss(probe, sample);
    probe[i] = xi;
    worst = std::max(worst, std::abs(g[i] - (up - down) / (2.0 * h)));
  }
  return worst / std::max(1.0, g.lpNorm<Eigen::Infinity>());
}

}  // namespace sqnlab
