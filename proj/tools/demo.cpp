// Minimal library walk-through: one noisy quadratic, three updaters, one randomized run.

#include <cstdio>

#include "sqnlab/oracle/quadratic.hpp"
#include "sqnlab/solvers/sqn.hpp"

int main() {
  using namespace sqnlab;

  QuadraticSpec spec;
  spec.n = 100;
  spec.spectrum_set = {0.1, 1.0};
  spec.seed = 7;
  const auto problem = QuadraticProblem::generate(spec);

  RunConfig cfg;
  cfg.stepsize = StepsizeSchedule::harmonic(1e2, 1e3);
  cfg.batch.m = 5;
  cfg.rho = 0.01;
  cfg.seed = 11;

  std::printf("%-8s %-10s %6s %8s %10s\n", "updater", "status", "iters", "n_sfo", "|grad f|");
  for (auto kind : {UpdaterKind::Sgd, UpdaterKind::Sdbfgs, UpdaterKind::Scbb}) {
    RunConfig c = cfg;
    c.updater = kind;
    c.safeguard.zeta = kind == UpdaterKind::Sdbfgs ? 1e-4 : 0.0;
    c.cbb.variant = BbVariant::B;
    const auto report = run_sqn(problem, c);
    std::printf("%-8s %-10s %6llu %8llu %10.4f\n", std::string(to_string(kind)).c_str(),
                std::string(to_string(report.status)).c_str(), static_cast<unsigned long long>(report.iterations),
                static_cast<unsigned long long>(report.n_sfo), report.grad_norm);
  }

  // Randomized stopping: with a constant step the output index is uniform on {1, ..., N}.
  RunConfig r = cfg;
  r.rho.reset();
  r.updater = UpdaterKind::Scbb;
  r.stepsize = StepsizeSchedule::constant(0.4);
  r.max_iterations = 400;
  TheoryConstants constants;
  constants.L = problem.lipschitz_bound() * 1.1;
  const auto randomized = run_rsqn(problem, r, constants);
  std::printf("randomized SCBB: R = %llu, |grad f(x_R)|^2 = %.4g\n",
              static_cast<unsigned long long>(randomized.stopping_index), randomized.grad_norm_sq);
  return 0;
}
