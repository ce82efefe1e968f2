#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "sqnlab/core/errors.hpp"
#include "sqnlab/core/rng.hpp"
#include "sqnlab/solvers/schedules.hpp"

namespace sqnlab {

/// Constants of the complexity analysis.
struct TheoryConstants {
  double L = 1.0;        // Lipschitz constant of grad f
  double sigma = 1.0;    // gradient noise level
  double m = 1.0;        // lower spectral bound of B^{-1} + zeta I
  double M = 1.0;        // upper spectral bound of B^{-1} + zeta I
  double D_f = 1.0;      // f(x_1) - f_low
  double D_tilde = 1.0;  // problem-independent scaling constant

  void validate() const {
    if (!(L > 0.0 && sigma >= 0.0 && m > 0.0 && M > 0.0 && D_f > 0.0 && D_tilde > 0.0))
      throw InvalidConfig("theory constants must be positive");
    if (m > M) throw InvalidConfig("theory constants need m <= M");
  }

  /// Largest stepsize keeping the stopping weight nonnegative: 2m / (L M^2).
  double max_stepsize() const { return 2.0 * m / (L * M * M); }
};

/**
 * Distribution of the output index R over {1, ..., N}:
 * P(R = k) proportional to w_k = m alpha_k - L M^2 alpha_k^2 / 2.
 */
struct RandomizedStopping {
  std::uint64_t horizon = 1;
  std::vector<double> weights;
  std::vector<double> probabilities;  // probabilities[k-1] = P(R = k)
};

inline RandomizedStopping build_pr(const StepsizeSchedule& schedule, std::uint64_t horizon, const TheoryConstants& c) {
  if (horizon < 1) throw InvalidConfig("build_pr: horizon must be at least 1");
  c.validate();
  RandomizedStopping rs;
  rs.horizon = horizon;
  rs.weights.resize(horizon);
  const double curvature = c.L * c.M * c.M / 2.0;
  bool any_positive = false;
  for (std::uint64_t k = 1; k <= horizon; ++k) {
    const double alpha = schedule(k);
    if (!(alpha > 0.0)) throw InvalidStepsize("build_pr: stepsizes must be positive");
    const double w = c.m * alpha - curvature * alpha * alpha;
    // alpha_k = 2m/(LM^2) gives w_k = 0 up to rounding; only larger steps are rejected.
    if (alpha > c.max_stepsize() * (1.0 + 1e-12))
      throw InvalidStepsize("build_pr: stepsize exceeds 2m/(L M^2) at iteration " + std::to_string(k));
    rs.weights[k - 1] = w > 0.0 ? w : 0.0;
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw InvalidStepsize("build_pr: every stopping weight is nonpositive");
  rs.probabilities.resize(horizon);
  // Equal weights (any constant stepsize) give exactly 1/N rather than w / (sum of N w's).
  if (std::all_of(rs.weights.begin(), rs.weights.end(), [&](double w) { return w == rs.weights.front(); })) {
    std::fill(rs.probabilities.begin(), rs.probabilities.end(), 1.0 / static_cast<double>(horizon));
    return rs;
  }
  const double total = std::accumulate(rs.weights.begin(), rs.weights.end(), 0.0);
  for (std::uint64_t k = 0; k < horizon; ++k) rs.probabilities[k] = rs.weights[k] / total;
  return rs;
}

/// Draws R in [1, N] according to the stopping distribution.
inline std::uint64_t sample_stopping_index(const RandomizedStopping& rs, SeededRng& rng) {
  if (rs.probabilities.empty()) throw InvalidConfig("sample_stopping_index: empty distribution");
  if (rs.probabilities.size() == 1) return 1;
  std::discrete_distribution<std::uint64_t> dist(rs.weights.begin(), rs.weights.end());
  return dist(rng) + 1;
}

}  // namespace sqnlab
