#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "sqnlab/harness/experiment.hpp"

namespace sqnlab {

/// "S=0.1;1" style label for a spectrum set (no commas, so it stays one CSV field).
inline std::string spectrum_label(const std::vector<double>& set) {
  std::ostringstream out;
  out << "S=";
  for (std::size_t i = 0; i < set.size(); ++i) out << (i ? ";" : "") << set[i];
  return out.str();
}

/**
 * Diagonal quadratic comparison: SGD with two harmonic stepsizes, RES, SDBFGS
 * and SCBB, batch 5, stopping at relative distance 0.01 or 10^4 iterations.
 */
inline ExperimentSpec quadratic_preset(Index n, std::vector<double> spectrum_set, std::uint64_t master_seed = 2) {
  if (n < 2) throw InvalidConfig("quadratic_preset: n must be at least 2");
  QuadraticSpec problem;
  problem.n = n;
  problem.spectrum_set = std::move(spectrum_set);
  problem.noise = 0.1;
  for (double v : problem.spectrum_set)
    if (!(v > 0.0)) throw InvalidConfig("quadratic_preset: spectrum entries must be positive");
  if (problem.spectrum_set.empty()) throw InvalidConfig("quadratic_preset: empty spectrum set");

  ExperimentSpec spec;
  spec.name = "quadratic";
  spec.problem = problem;
  spec.master_seed = master_seed;
  spec.runs = 20;
  const std::string label = spectrum_label(problem.spectrum_set);

  RunConfig base;
  base.stepsize = StepsizeSchedule::harmonic(1e2, 1e3);
  base.batch.m = 5;
  base.rho = 0.01;
  base.max_iterations = 10000;

  auto add = [&](std::string name, RunConfig cfg) {
    AlgorithmSpec a;
    a.name = std::move(name);
    a.param_set = label;
    a.config = std::move(cfg);
    spec.algorithms.push_back(std::move(a));
  };

  RunConfig sgd = base;
  sgd.updater = UpdaterKind::Sgd;
  add("SGD", sgd);
  sgd.stepsize = StepsizeSchedule::harmonic(1e4, 1e4);
  add("SGD-1e4", sgd);

  RunConfig res = base;
  res.updater = UpdaterKind::Res;
  res.res.delta_hat = 1e-3;
  res.res.gamma = 1e-4;
  res.safeguard.zeta = res.res.gamma;
  add("RES", res);

  RunConfig sdbfgs = base;
  sdbfgs.updater = UpdaterKind::Sdbfgs;
  sdbfgs.sdbfgs.delta = 1e-3;
  sdbfgs.safeguard.zeta = 1e-4;
  add("SDBFGS", sdbfgs);

  RunConfig scbb = base;
  scbb.updater = UpdaterKind::Scbb;
  scbb.cbb.q = 5;
  scbb.cbb.lambda_min = 1e-6;
  scbb.cbb.lambda_max = 1e8;
  scbb.cbb.variant = BbVariant::B;
  add("SCBB", scbb);
  return spec;
}

/// SFO budgets of the sigmoid-SVM comparison.
inline const std::vector<std::uint64_t>& svm_nsfo_grid() {
  static const std::vector<std::uint64_t> grid{2500, 5000, 10000, 20000};
  return grid;
}

/**
 * Sigmoid-SVM comparison under randomized stopping: RSG (plain SGD), RSDBFGS
 * and RSCBB, batch 1, constant stepsize 1/(2 L_hat), horizon = SFO budget.
 */
inline ExperimentSpec svm_preset(Index n, std::uint64_t nsfo, std::uint64_t master_seed = 2) {
  if (n < 2) throw InvalidConfig("svm_preset: n must be at least 2");
  if (nsfo < 1) throw InvalidConfig("svm_preset: nsfo must be positive");
  SvmSpec problem;
  problem.n = n;
  problem.lambda = 0.01;
  problem.test_size = 75000;
  problem.eval_size = 75000;

  ExperimentSpec spec;
  spec.name = "svm";
  spec.problem = problem;
  spec.master_seed = master_seed;
  spec.runs = 20;

  RunConfig base;
  base.batch.m = 1;
  base.max_iterations = nsfo;

  auto add = [&](std::string name, RunConfig cfg) {
    AlgorithmSpec a;
    a.name = std::move(name);
    a.param_set = "nsfo=" + std::to_string(nsfo);
    a.config = std::move(cfg);
    a.randomized = true;
    a.sfo_budget = nsfo;
    a.step = {StepPolicy::Kind::InverseLipschitz, 0.5};
    spec.algorithms.push_back(std::move(a));
  };

  RunConfig rsg = base;
  rsg.updater = UpdaterKind::Sgd;
  add("RSG", rsg);

  RunConfig sdbfgs = base;
  sdbfgs.updater = UpdaterKind::Sdbfgs;
  sdbfgs.sdbfgs.delta = 1e-3;
  sdbfgs.safeguard.zeta = 1e-4;
  add("RSDBFGS", sdbfgs);

  RunConfig scbb = base;
  scbb.updater = UpdaterKind::Scbb;
  scbb.cbb.q = 5;
  scbb.cbb.lambda_min = 1e-6;
  scbb.cbb.lambda_max = 1e8;
  scbb.cbb.variant = BbVariant::B;
  add("RSCBB", scbb);
  return spec;
}

/// Keeps only the named algorithms, in the preset's order.
inline ExperimentSpec only_algorithms(ExperimentSpec spec, const std::vector<std::string>& names) {
  std::vector<AlgorithmSpec> kept;
  for (auto& a : spec.algorithms)
    if (std::find(names.begin(), names.end(), a.name) != names.end()) kept.push_back(std::move(a));
  spec.algorithms = std::move(kept);
  return spec;
}

}  // namespace sqnlab
