#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqnlab/core/errors.hpp"
#include "sqnlab/core/linalg.hpp"
#include "sqnlab/solvers/schedules.hpp"
#include "sqnlab/updaters/cyclic_bb.hpp"
#include "sqnlab/updaters/damped_bfgs.hpp"
#include "sqnlab/updaters/shifted_bfgs.hpp"

namespace sqnlab {

enum class UpdaterKind { Sgd, Sdbfgs, Res, Scbb };

inline std::string_view to_string(UpdaterKind kind) {
  switch (kind) {
    case UpdaterKind::Sgd: return "sgd";
    case UpdaterKind::Sdbfgs: return "sdbfgs";
    case UpdaterKind::Res: return "res";
    case UpdaterKind::Scbb: return "scbb";
  }
  return "sgd";
}

inline UpdaterKind updater_from_string(std::string_view name) {
  if (name == "sgd") return UpdaterKind::Sgd;
  if (name == "sdbfgs") return UpdaterKind::Sdbfgs;
  if (name == "res") return UpdaterKind::Res;
  if (name == "scbb") return UpdaterKind::Scbb;
  throw InvalidConfig("unknown updater '" + std::string(name) + "'");
}

struct RunConfig {
  UpdaterKind updater = UpdaterKind::Sgd;
  StepsizeSchedule stepsize = StepsizeSchedule::harmonic(1e2, 1e3);
  BatchSchedule batch{1};
  SafeguardSchedule safeguard{0.0};
  std::uint64_t max_iterations = 10000;
  std::optional<double> rho;  // stop at ||x_k - x*|| / max(1, ||x*||) <= rho
  std::uint64_t seed = 0;
  double b1_scale = 1.0;  // dense B_1 = b1_scale * I; the cyclic BB updater starts at lambda = 1
  DampedBfgsConfig sdbfgs{};
  ResConfig res{};
  CbbConfig cbb{};
  std::optional<Vector> x0;  // defaults to the problem's initial point
  double divergence_threshold = 1e10;
  std::uint64_t audit_interval = 0;  // min-eigenvalue audit of dense B_k every this many iterations
  bool record_trace = true;

  void validate() const {
    stepsize.validate();
    if (batch.m < 1) throw InvalidConfig("batch size must be at least 1");
    if (!(safeguard.zeta >= 0.0)) throw InvalidConfig("safeguard must be nonnegative");
    if ((updater == UpdaterKind::Sdbfgs || updater == UpdaterKind::Res) && !(safeguard.zeta > 0.0))
      throw InvalidConfig("dense quasi-Newton updaters need a positive safeguard");
    if (max_iterations < 1) throw InvalidConfig("max_iterations must be at least 1");
    if (rho && !(*rho > 0.0)) throw InvalidConfig("rho must be positive");
    if (!(b1_scale > 0.0)) throw InvalidConfig("b1_scale must be positive");
    if (!(divergence_threshold > 0.0)) throw InvalidConfig("divergence_threshold must be positive");
    sdbfgs.validate();
    res.validate();
    cbb.validate();
  }

  /// SFO calls one iteration k consumes: m_k, plus m_k again whenever a same-batch gradient is needed.
  std::uint64_t sfo_per_iteration(std::uint64_t k) const {
    const std::uint64_t m = batch(k);
    switch (updater) {
      case UpdaterKind::Sdbfgs:
      case UpdaterKind::Res: return 2 * m;
      case UpdaterKind::Scbb: return k % cbb.q == 0 ? 2 * m : m;
      case UpdaterKind::Sgd: return m;
    }
    return m;
  }

  /// Total SFO calls of T full iterations.
  std::uint64_t sfo_for_iterations(std::uint64_t iterations) const {
    std::uint64_t total = 0;
    for (std::uint64_t k = 1; k <= iterations; ++k) total += sfo_per_iteration(k);
    return total;
  }
};

enum class RunStatus { Converged, IterationCap, Diverged, RandomStop };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::IterationCap: return "iteration_cap";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::RandomStop: return "random_stop";
  }
  return "iteration_cap";
}

struct TracePoint {
  std::uint64_t k = 0;
  std::uint64_t n_sfo = 0;
  double sample_gradient_norm = 0.0;
  double step_norm = 0.0;

  bool operator==(const TracePoint&) const = default;
};

struct RunReport {
  RunStatus status = RunStatus::IterationCap;
  std::uint64_t iterations = 0;
  std::uint64_t n_sfo = 0;
  Vector final_x;
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  double grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t bb_steps = 0;
  std::uint64_t fallback_steps = 0;
  std::uint64_t curvature_resets = 0;
  std::uint64_t skipped_updates = 0;
  std::uint64_t audits = 0;
  std::uint64_t spectral_violations = 0;
  std::uint64_t stopping_index = 0;  // R for randomized runs, 0 otherwise
  double wall_seconds = 0.0;
  std::vector<TracePoint> trace;

  /// BB-step share of cycle boundaries; empty when no boundary was reached.
  std::optional<double> bb_fraction() const {
    const auto total = bb_steps + fallback_steps;
    if (total == 0) return std::nullopt;
    return static_cast<double>(bb_steps) / static_cast<double>(total);
  }

  /// Equality of everything except wall time, bitwise on floating-point fields.
  bool same_outcome(const RunReport& o) const {
    auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
    return status == o.status && iterations == o.iterations && n_sfo == o.n_sfo && final_x.size() == o.final_x.size() &&
           final_x == o.final_x && same(grad_norm, o.grad_norm) && same(grad_norm_sq, o.grad_norm_sq) &&
           bb_steps == o.bb_steps && fallback_steps == o.fallback_steps && curvature_resets == o.curvature_resets &&
           skipped_updates == o.skipped_updates && audits == o.audits && spectral_violations == o.spectral_violations &&
           stopping_index == o.stopping_index && trace == o.trace;
  }
};

}  // namespace sqnlab
