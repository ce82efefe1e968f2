#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "sqnlab/core/errors.hpp"
#include "sqnlab/core/rng.hpp"
#include "sqnlab/oracle/problem_io.hpp"
#include "sqnlab/oracle/quadratic.hpp"
#include "sqnlab/oracle/sigmoid_svm.hpp"
#include "sqnlab/solvers/complexity.hpp"
#include "sqnlab/solvers/lipschitz.hpp"
#include "sqnlab/solvers/randomized_stopping.hpp"
#include "sqnlab/solvers/run_config.hpp"
#include "sqnlab/solvers/sqn.hpp"

namespace sqnlab {

inline constexpr const char* kToolVersion = "0.1.0";

/// How an algorithm's stepsize is chosen: as configured, or constant factor / L_hat.
struct StepPolicy {
  enum class Kind { Fixed, InverseLipschitz };
  Kind kind = Kind::Fixed;
  double factor = 0.5;

  bool operator==(const StepPolicy&) const = default;
};

struct AlgorithmSpec {
  std::string name;
  std::string param_set;
  RunConfig config;
  bool randomized = false;
  std::uint64_t sfo_budget = 0;  // randomized runs: horizon ceil(budget / m) when positive
  StepPolicy step;
  std::optional<TheoryConstants> stopping;  // defaults to L = L_hat, m = M = 1
};

struct ExperimentSpec {
  std::string name = "experiment";
  ProblemSpec problem = QuadraticSpec{};
  bool problem_seed_follows_master = true;
  std::vector<AlgorithmSpec> algorithms;
  std::size_t runs = 20;
  std::uint64_t master_seed = 2;
  std::size_t workers = 0;  // 0: one per hardware thread
  std::string out_dir;

  /// The problem spec with the seed actually used.
  ProblemSpec effective_problem() const {
    ProblemSpec p = problem;
    if (problem_seed_follows_master) std::visit([&](auto& s) { s.seed = master_seed; }, p);
    return p;
  }

  void validate() const {
    if (runs < 1) throw InvalidConfig("experiment: runs must be at least 1");
    if (algorithms.empty()) throw InvalidConfig("experiment: no algorithms");
    auto csv_safe = [](const std::string& s) { return s.find_first_of(",\"\n\r") == std::string::npos; };
    if (!csv_safe(name)) throw InvalidConfig("experiment: name must not contain commas, quotes or newlines");
    std::set<std::string> names;
    for (const auto& a : algorithms) {
      if (a.name.empty()) throw InvalidConfig("experiment: algorithm name must not be empty");
      if (!csv_safe(a.name) || !csv_safe(a.param_set))
        throw InvalidConfig("algorithm '" + a.name + "': names must not contain commas, quotes or newlines");
      if (!names.insert(a.name).second) throw InvalidConfig("experiment: duplicate algorithm name '" + a.name + "'");
      a.config.validate();
      if (a.step.kind == StepPolicy::Kind::InverseLipschitz && !(a.step.factor > 0.0))
        throw InvalidConfig("algorithm '" + a.name + "': step factor must be positive");
      if (a.stopping) a.stopping->validate();
      if (!a.randomized && a.sfo_budget > 0)
        throw InvalidConfig("algorithm '" + a.name + "': sfo_budget applies to randomized runs only");
    }
  }
};

/// Seed of run r of an algorithm; independent of execution order.
inline std::uint64_t run_seed(std::uint64_t master, const std::string& algorithm, std::uint64_t run) {
  return derive_seed(master, "run:" + algorithm, run);
}

struct RunRecord {
  std::string experiment;
  std::string algo;
  Index n = 0;
  std::string param_set;
  std::uint64_t run = 0;
  std::uint64_t seed = 0;
  std::optional<UpdaterKind> updater;
  std::string status;  // RunStatus name, or "failed"
  std::string message;
  std::uint64_t iterations = 0;
  std::uint64_t stopping_index = 0;
  std::uint64_t n_sfo = 0;
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  double grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
  double err = std::numeric_limits<double>::quiet_NaN();
  double bb_fraction = std::numeric_limits<double>::quiet_NaN();  // NaN: no cycle boundary reached
  std::uint64_t resets = 0;
  double cpu_seconds = 0.0;

  bool failed() const { return status == "failed"; }
  bool diverged() const { return status == to_string(RunStatus::Diverged); }
};

/// Per-algorithm summary. Gradient and error statistics skip diverged and failed runs.
struct AggregateStats {
  std::string algo;
  std::string param_set;
  std::uint64_t runs = 0;
  std::uint64_t completed = 0;
  std::uint64_t divergent = 0;
  std::uint64_t capped = 0;
  std::uint64_t failed = 0;
  double mean_grad_norm = std::numeric_limits<double>::quiet_NaN();
  double var_grad_norm = std::numeric_limits<double>::quiet_NaN();
  double mean_grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
  double var_grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
  double mean_n_sfo = std::numeric_limits<double>::quiet_NaN();
  double mean_cpu_seconds = std::numeric_limits<double>::quiet_NaN();
  double mean_err = std::numeric_limits<double>::quiet_NaN();
  double mean_bb_fraction = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t bb_runs = 0;

  /// Field-wise equality, bitwise on doubles, NaN equal to NaN.
  bool identical(const AggregateStats& o) const {
    auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
    return algo == o.algo && param_set == o.param_set && runs == o.runs && completed == o.completed &&
           divergent == o.divergent && capped == o.capped && failed == o.failed &&
           same(mean_grad_norm, o.mean_grad_norm) && same(var_grad_norm, o.var_grad_norm) &&
           same(mean_grad_norm_sq, o.mean_grad_norm_sq) && same(var_grad_norm_sq, o.var_grad_norm_sq) &&
           same(mean_n_sfo, o.mean_n_sfo) && same(mean_cpu_seconds, o.mean_cpu_seconds) &&
           same(mean_err, o.mean_err) && same(mean_bb_fraction, o.mean_bb_fraction) && bb_runs == o.bb_runs;
  }
};

/// Running mean and sample variance (N - 1 denominator) by Welford's update.
class RunningStats {
 public:
  void add(double x) {
    ++count_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(count_);
    m2_ += d * (x - mean_);
  }
  std::uint64_t count() const noexcept { return count_; }
  double mean() const { return count_ == 0 ? std::numeric_limits<double>::quiet_NaN() : mean_; }
  double variance() const {
    if (count_ == 0) return std::numeric_limits<double>::quiet_NaN();
    if (count_ == 1) return 0.0;
    return std::max(0.0, m2_ / static_cast<double>(count_ - 1));
  }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Aggregates the records of one algorithm (records of other algorithms are ignored).
inline AggregateStats aggregate(const std::vector<RunRecord>& records, const std::string& algo) {
  AggregateStats a;
  a.algo = algo;
  RunningStats g, g2, sfo, cpu, err, bb;
  for (const auto& r : records) {
    if (r.algo != algo) continue;
    a.param_set = r.param_set;
    ++a.runs;
    if (r.failed()) {
      ++a.failed;
      continue;
    }
    sfo.add(static_cast<double>(r.n_sfo));
    cpu.add(r.cpu_seconds);
    if (r.diverged()) {
      ++a.divergent;
      continue;
    }
    if (r.status == to_string(RunStatus::IterationCap)) ++a.capped;
    ++a.completed;
    if (!std::isnan(r.grad_norm)) g.add(r.grad_norm);
    if (!std::isnan(r.grad_norm_sq)) g2.add(r.grad_norm_sq);
    if (!std::isnan(r.err)) err.add(r.err);
    if (!std::isnan(r.bb_fraction)) bb.add(r.bb_fraction);
  }
  a.mean_grad_norm = g.mean();
  a.var_grad_norm = g.variance();
  a.mean_grad_norm_sq = g2.mean();
  a.var_grad_norm_sq = g2.variance();
  a.mean_n_sfo = sfo.mean();
  a.mean_cpu_seconds = cpu.mean();
  a.mean_err = err.mean();
  a.mean_bb_fraction = bb.mean();
  a.bb_runs = bb.count();
  return a;
}

struct ExperimentResult {
  ExperimentSpec spec;
  double lipschitz = std::numeric_limits<double>::quiet_NaN();  // L_hat, when some algorithm needed it
  std::vector<RunRecord> records;                               // ordered by (algorithm, run)
  std::vector<AggregateStats> aggregates;                       // in algorithm order

  const AggregateStats& stats(const std::string& algo) const {
    for (const auto& a : aggregates)
      if (a.algo == algo) return a;
    throw InvalidConfig("no aggregate for algorithm '" + algo + "'");
  }
};

using RecordObserver = std::function<void(const RunRecord&)>;

/// Quadratic: max of the diagonal times 1.1, covering the multiplicative perturbation.
inline double lipschitz_estimate(const QuadraticProblem& p, std::uint64_t /*master_seed*/) {
  return p.lipschitz_bound() * 1.1;
}

/// SVM: the per-sample Hessian probe along [0, x_1] on its own random stream.
inline double lipschitz_estimate(const SigmoidSvmProblem& p, std::uint64_t master_seed) {
  SeededRng rng(derive_seed(master_seed, "lipschitz", 0), 0);
  return estimate_lipschitz(p, p.initial_point(), rng);
}

namespace detail {

inline bool needs_lipschitz(const ExperimentSpec& spec) {
  return std::any_of(spec.algorithms.begin(), spec.algorithms.end(), [](const AlgorithmSpec& a) {
    return a.step.kind == StepPolicy::Kind::InverseLipschitz || (a.randomized && !a.stopping);
  });
}

/// The run configuration after applying the step policy and the SFO budget.
inline RunConfig resolve_config(const AlgorithmSpec& a, double l_hat) {
  RunConfig cfg = a.config;
  if (a.step.kind == StepPolicy::Kind::InverseLipschitz) cfg.stepsize = StepsizeSchedule::constant(a.step.factor / l_hat);
  if (a.randomized && a.sfo_budget > 0) cfg.max_iterations = horizon_from_budget(a.sfo_budget, cfg.batch.m);
  return cfg;
}

inline TheoryConstants resolve_stopping(const AlgorithmSpec& a, double l_hat) {
  if (a.stopping) return *a.stopping;
  TheoryConstants c;
  c.L = l_hat;
  return c;
}

template <class P>
RunRecord execute_run(const P& problem, const ExperimentSpec& spec, const AlgorithmSpec& a, std::uint64_t run,
                      double l_hat) {
  RunRecord rec;
  rec.experiment = spec.name;
  rec.algo = a.name;
  rec.n = problem.dim();
  rec.param_set = a.param_set;
  rec.run = run;
  rec.seed = run_seed(spec.master_seed, a.name, run);
  rec.updater = a.config.updater;
  RunConfig cfg = resolve_config(a, l_hat);
  cfg.seed = rec.seed;
  cfg.record_trace = false;
  try {
    const RunReport report = a.randomized ? run_rsqn(problem, cfg, resolve_stopping(a, l_hat)) : run_sqn(problem, cfg);
    rec.status = std::string(to_string(report.status));
    rec.iterations = report.iterations;
    rec.stopping_index = report.stopping_index;
    rec.resets = report.curvature_resets;
    rec.cpu_seconds = report.wall_seconds;
    if (const auto bb = report.bb_fraction()) rec.bb_fraction = *bb;
    if (report.status == RunStatus::Diverged) {
      rec.n_sfo = cfg.sfo_for_iterations(cfg.max_iterations);
    } else {
      rec.n_sfo = report.n_sfo;
      rec.grad_norm = report.grad_norm;
      rec.grad_norm_sq = report.grad_norm_sq;
      if constexpr (std::is_same_v<P, SigmoidSvmProblem>) rec.err = problem.misclassification_error(report.final_x);
    }
  } catch (const std::exception& e) {
    rec.status = "failed";
    rec.message = e.what();
  }
  return rec;
}

template <class P>
ExperimentResult run_on(const P& problem, const ExperimentSpec& spec, const RecordObserver& observer) {
  ExperimentResult result;
  result.spec = spec;
  const double l_hat = needs_lipschitz(spec) ? lipschitz_estimate(problem, spec.master_seed)
                                             : std::numeric_limits<double>::quiet_NaN();
  result.lipschitz = l_hat;

  // Surface configuration errors before any run starts.
  for (const auto& a : spec.algorithms) {
    const RunConfig cfg = resolve_config(a, l_hat);
    cfg.validate();
    if (a.randomized) build_pr(cfg.stepsize, cfg.max_iterations, resolve_stopping(a, l_hat));
  }

  const std::size_t tasks = spec.algorithms.size() * spec.runs;
  result.records.resize(tasks);
  std::size_t workers = spec.workers != 0 ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, tasks);
  std::atomic<std::size_t> next{0};
  std::mutex observer_mutex;
  auto work = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const auto& algo = spec.algorithms[t / spec.runs];
      result.records[t] = execute_run(problem, spec, algo, t % spec.runs, l_hat);
      if (observer) {
        std::lock_guard lock(observer_mutex);
        observer(result.records[t]);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& a : spec.algorithms) result.aggregates.push_back(aggregate(result.records, a.name));
  return result;
}

}  // namespace detail

/**
 * Runs every algorithm of the spec `runs` times on one problem instance.
 *
 * Runs are independent tasks on a bounded pool of threads; each uses the seed
 * run_seed(master, algorithm, run), so the records do not depend on the pool
 * size or scheduling. A run that throws is kept as a "failed" record.
 */
inline ExperimentResult run_experiment(const ExperimentSpec& spec, const RecordObserver& observer = {}) {
  spec.validate();
  return std::visit(
      [&](const auto& ps) -> ExperimentResult {
        using S = std::decay_t<decltype(ps)>;
        if constexpr (std::is_same_v<S, QuadraticSpec>) {
          return detail::run_on(QuadraticProblem::generate(ps), spec, observer);
        } else {
          return detail::run_on(SigmoidSvmProblem::generate(ps), spec, observer);
        }
      },
      spec.effective_problem());
}

}  // namespace sqnlab
