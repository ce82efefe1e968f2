#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>

#include "sqnlab/core/errors.hpp"
#include "sqnlab/core/linalg.hpp"
#include "sqnlab/core/rng.hpp"
#include "sqnlab/oracle/problem.hpp"
#include "sqnlab/solvers/randomized_stopping.hpp"
#include "sqnlab/solvers/run_config.hpp"
#include "sqnlab/updaters/cyclic_bb.hpp"
#include "sqnlab/updaters/damped_bfgs.hpp"
#include "sqnlab/updaters/identity.hpp"
#include "sqnlab/updaters/shifted_bfgs.hpp"

namespace sqnlab {

/// Random stream indices used by one run; the master seed is RunConfig::seed.
inline constexpr std::uint64_t kSampleStream = 0;
inline constexpr std::uint64_t kStoppingStream = 1;

/// x - alpha (B^{-1} + zeta I) G
inline Vector sqn_step(const Vector& x, const CurvatureApprox& b, double zeta, double alpha, const Vector& g) {
  if (!(alpha > 0.0)) throw InvalidConfig("sqn_step: alpha must be positive");
  require_same_dim(x.size(), g.size(), "sqn_step");
  return x - alpha * apply_inverse_plus_shift(b, zeta, g);
}

/// Snapshot handed to an observer after each iteration.
struct IterationInfo {
  std::uint64_t k;
  double alpha;
  double zeta;
  const Vector& x;       // x_k
  const Vector& x_next;  // x_{k+1}
  const Vector& g;       // G_k
  double lambda;         // current lambda for the cyclic BB updater, NaN otherwise
  const Matrix* dense;   // B_{k+1} for dense updaters, null otherwise
  std::uint64_t n_sfo;
};

using IterationObserver = std::function<void(const IterationInfo&)>;

namespace detail {

/// Curvature held by a run: dense B_k with its Cholesky factor, or the BB scalar.
class CurvatureState {
 public:
  CurvatureState(const RunConfig& cfg, Index n) : cfg_(cfg), n_(n) {
    if (cfg.updater == UpdaterKind::Sdbfgs || cfg.updater == UpdaterKind::Res) set_dense(SpdMatrix::identity(n, cfg.b1_scale));
  }

  bool dense() const noexcept { return dense_.has_value(); }
  const SpdMatrix& matrix() const { return *dense_; }
  const CbbState& cbb() const noexcept { return cbb_; }
  std::uint64_t resets() const noexcept { return resets_; }
  std::uint64_t skipped() const noexcept { return skipped_; }

  Vector direction(const Vector& g, double zeta) const {
    if (dense()) {
      Vector d = llt_.solve(g);
      d.noalias() += zeta * g;
      return d;
    }
    const double lambda = cfg_.updater == UpdaterKind::Scbb ? cbb_.lambda : 1.0;
    return (lambda + zeta) * g;
  }

  void sdbfgs(const Vector& s, const Vector& y_hat, double x_norm) {
    auto result = sdbfgs_update(*dense_, s, y_hat, cfg_.sdbfgs, x_norm);
    if (result.status == UpdateStatus::Skipped) {
      ++skipped_;
      return;
    }
    try {
      set_dense(std::move(result.matrix));
    } catch (const FactorizationFailed&) {
      reset(cfg_.sdbfgs.delta);
    }
  }

  void res(const Vector& s, const Vector& y_hat, double x_norm) {
    auto result = res_update(*dense_, s, y_hat, cfg_.res, x_norm);
    switch (result.status) {
      case UpdateStatus::Skipped: ++skipped_; break;
      case UpdateStatus::Breakdown: reset(cfg_.res.delta_hat); break;
      case UpdateStatus::Updated:
        dense_ = SpdMatrix(std::move(result.matrix));
        llt_ = std::move(*result.factor);
        break;
    }
  }

  void scbb(const Vector& s, const Vector& y) { cbb_ = scbb_update(cbb_, s, y, cfg_.cbb); }
  void scbb_off_cycle() { cbb_ = scbb_advance(cbb_); }

 private:
  void set_dense(SpdMatrix b) {
    llt_ = b.factor();
    dense_ = std::move(b);
  }

  void reset(double delta) {
    ++resets_;
    set_dense(SpdMatrix::identity(n_, delta));
  }

  const RunConfig& cfg_;
  Index n_;
  std::optional<SpdMatrix> dense_;
  Eigen::LLT<Matrix> llt_;
  CbbState cbb_{};
  std::uint64_t resets_ = 0;
  std::uint64_t skipped_ = 0;
};

template <StochasticProblem P>
RunReport run_loop(const P& problem, const RunConfig& cfg, std::uint64_t iteration_limit, bool randomized,
                   const IterationObserver& observer) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const Index n = problem.dim();

  Vector x;
  if (cfg.x0) {
    x = *cfg.x0;
  } else {
    x = problem.initial_point();
  }
  require_same_dim(n, x.size(), "initial point");

  std::optional<Vector> target;
  double target_scale = 1.0;
  if constexpr (HasStationaryPoint<P>) {
    if (cfg.rho) {
      target = problem.stationary_point();
      target_scale = std::max(1.0, target->norm());
    }
  } else {
    if (cfg.rho) throw InvalidConfig("rho termination needs a problem with a known stationary point");
  }

  SeededRng rng(cfg.seed, kSampleStream);
  OracleCounter counter;
  CurvatureState curvature(cfg, n);
  RunReport report;
  const std::uint64_t trace_every = std::max<std::uint64_t>(1, (iteration_limit + 999) / 1000);
  const double spectral_floor = cfg.sdbfgs.delta - 1e-9;
  Vector output = x;

  report.status = randomized ? RunStatus::RandomStop : RunStatus::IterationCap;
  for (std::uint64_t k = 1; k <= iteration_limit; ++k) {
    if (target && (x - *target).norm() / target_scale <= *cfg.rho) {
      report.status = RunStatus::Converged;
      break;
    }
    output = x;
    const double alpha = cfg.stepsize(k);
    const double zeta = cfg.safeguard(k);
    const auto batch = draw_batch(problem, cfg.batch(k), rng);
    const Vector g = minibatch_gradient(problem, x, batch, counter);
    Vector x_next = x - alpha * curvature.direction(g, zeta);
    report.iterations = k;

    const double next_norm = x_next.norm();
    if (!x_next.allFinite() || !(next_norm <= cfg.divergence_threshold)) {
      report.status = RunStatus::Diverged;
      x = std::move(x_next);
      break;
    }

    const Vector s = x_next - x;
    switch (cfg.updater) {
      case UpdaterKind::Sgd: break;
      case UpdaterKind::Sdbfgs: {
        const Vector g_bar = gradient_same_batch(problem, x_next, batch, counter);
        curvature.sdbfgs(s, g_bar - g - cfg.sdbfgs.delta * s, x.norm());
        break;
      }
      case UpdaterKind::Res: {
        const Vector g_bar = gradient_same_batch(problem, x_next, batch, counter);
        curvature.res(s, g_bar - g - cfg.res.delta_hat * s, x.norm());
        break;
      }
      case UpdaterKind::Scbb:
        if (at_cycle_boundary(curvature.cbb(), cfg.cbb)) {
          const Vector g_bar = gradient_same_batch(problem, x_next, batch, counter);
          curvature.scbb(s, g_bar - g);
        } else {
          curvature.scbb_off_cycle();
        }
        break;
    }

    if (curvature.dense() && cfg.updater == UpdaterKind::Sdbfgs && cfg.audit_interval > 0 &&
        k % cfg.audit_interval == 0) {
      ++report.audits;
      if (min_eigenvalue(curvature.matrix()) < spectral_floor) ++report.spectral_violations;
    }
    if (cfg.updater == UpdaterKind::Scbb) {
      const double effective = curvature.cbb().lambda + zeta;
      if (effective < cfg.cbb.spectrum_lower() + zeta || effective > cfg.cbb.spectrum_upper() + zeta)
        ++report.spectral_violations;
    }
    if (cfg.record_trace && (k % trace_every == 0 || k == 1))
      report.trace.push_back({k, counter.n_sfo, g.norm(), s.norm()});
    if (observer) {
      const double lambda = cfg.updater == UpdaterKind::Scbb ? curvature.cbb().lambda
                                                              : std::numeric_limits<double>::quiet_NaN();
      observer({k, alpha, zeta, x, x_next, g, lambda, curvature.dense() ? &curvature.matrix().matrix() : nullptr,
                counter.n_sfo});
    }
    x = std::move(x_next);
  }

  report.final_x = randomized ? output : x;
  report.n_sfo = counter.n_sfo;
  report.bb_steps = curvature.cbb().bb_steps;
  report.fallback_steps = curvature.cbb().fallback_steps;
  report.curvature_resets = curvature.resets();
  report.skipped_updates = curvature.skipped();
  if constexpr (HasFullGradient<P>) {
    if (report.status != RunStatus::Diverged && report.final_x.allFinite()) {
      const Vector full = problem.full_gradient(report.final_x);
      report.grad_norm_sq = full.squaredNorm();
      report.grad_norm = std::sqrt(report.grad_norm_sq);
    }
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace detail

/**
 * Stochastic quasi-Newton driver: x_{k+1} = x_k - alpha_k (B_k^{-1} + zeta_k I) G_k,
 * then B_{k+1} from the configured updater. Runs until the relative-distance
 * test (when rho is set), divergence, or max_iterations.
 */
template <StochasticProblem P>
RunReport run_sqn(const P& problem, const RunConfig& cfg, const IterationObserver& observer = {}) {
  return detail::run_loop(problem, cfg, cfg.max_iterations, false, observer);
}

/// Randomized variant with a given output index R: runs R iterations and returns x_R.
template <StochasticProblem P>
RunReport run_rsqn_with_index(const P& problem, const RunConfig& cfg, std::uint64_t stopping_index,
                              const IterationObserver& observer = {}) {
  if (stopping_index < 1) throw InvalidConfig("run_rsqn: stopping index must be at least 1");
  RunConfig local = cfg;
  local.rho.reset();
  auto report = detail::run_loop(problem, local, stopping_index, true, observer);
  report.stopping_index = stopping_index;
  return report;
}

/// Draws R from the stopping distribution over {1, ..., max_iterations} and runs to it.
template <StochasticProblem P>
RunReport run_rsqn(const P& problem, const RunConfig& cfg, const TheoryConstants& constants,
                   const IterationObserver& observer = {}) {
  cfg.validate();
  const auto rs = build_pr(cfg.stepsize, cfg.max_iterations, constants);
  SeededRng rng(cfg.seed, kStoppingStream);
  return run_rsqn_with_index(problem, cfg, sample_stopping_index(rs, rng), observer);
}

}  // namespace sqnlab
