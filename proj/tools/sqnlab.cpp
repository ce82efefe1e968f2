// Benchmark CLI: quadratic and sigmoid-SVM batteries, custom configs, BB-share report.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sqnlab/harness/experiment.hpp"
#include "sqnlab/harness/io.hpp"
#include "sqnlab/harness/presets.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitRuntime = 3;

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("SQNLAB_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') throw sqnlab::InvalidConfig("SQNLAB_SEED must be a nonnegative integer");
  return v;
}

std::vector<double> parse_set(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw sqnlab::InvalidConfig("--set: '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw sqnlab::InvalidConfig("--set must list at least one value");
  return out;
}

std::string cell(double v, const char* fmt = "%.3e") {
  if (std::isnan(v)) return "---";
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void print_summary(const sqnlab::ExperimentResult& result, bool svm) {
  std::printf("%-10s %-14s %10s %11s %11s %8s %8s %5s %5s\n", "algo", "param_set", "mean_nsfo",
              svm ? "mean_g2" : "mean_g", "var", svm ? "err(%)" : "cpu(s)", svm ? "bb(%)" : "", "div", "cap");
  for (const auto& a : result.aggregates) {
    const double mean = svm ? a.mean_grad_norm_sq : a.mean_grad_norm;
    const double var = svm ? a.var_grad_norm_sq : a.var_grad_norm;
    const bool flagged = a.divergent > 0 && a.completed == 0;
    std::printf("%-10s %-14s %10s %11s %11s %8s %8s %5llu %5llu\n", a.algo.c_str(), a.param_set.c_str(),
                cell(a.mean_n_sfo).c_str(), flagged ? "---" : cell(mean).c_str(), flagged ? "---" : cell(var).c_str(),
                svm ? cell(100.0 * a.mean_err, "%.2f").c_str() : cell(a.mean_cpu_seconds, "%.3f").c_str(),
                svm ? cell(100.0 * a.mean_bb_fraction, "%.2f").c_str() : "",
                static_cast<unsigned long long>(a.divergent), static_cast<unsigned long long>(a.capped));
  }
  if (!std::isnan(result.lipschitz)) std::printf("L_hat = %.6g\n", result.lipschitz);
}

int execute(sqnlab::ExperimentSpec spec, const std::string& out_dir, bool svm, bool quiet) {
  spec.validate();
  if (!out_dir.empty()) spec.out_dir = out_dir;
  sqnlab::RecordObserver progress;
  if (!quiet) {
    progress = [](const sqnlab::RunRecord& r) {
      std::fprintf(stderr, "  %s run %llu: %s, n_sfo=%llu\n", r.algo.c_str(), static_cast<unsigned long long>(r.run),
                   r.status.c_str(), static_cast<unsigned long long>(r.n_sfo));
    };
  }
  const auto result = sqnlab::run_experiment(spec, progress);
  print_summary(result, svm);
  if (!spec.out_dir.empty()) {
    sqnlab::write_outputs(result, spec.out_dir);
    std::printf("wrote %s/results.csv, results.json, problem.json\n", spec.out_dir.c_str());
  }
  for (const auto& a : result.aggregates)
    if (a.failed > 0) {
      std::fprintf(stderr, "error: %llu run(s) of %s failed; see results.json\n",
                   static_cast<unsigned long long>(a.failed), a.algo.c_str());
      return kExitRuntime;
    }
  return kExitOk;
}

int report_bbfrac(const std::string& in_dir) {
  namespace fs = std::filesystem;
  std::vector<sqnlab::RunRecord> records;
  std::vector<fs::path> files;
  if (fs::is_regular_file(in_dir)) {
    files.push_back(in_dir);
  } else {
    if (!fs::is_directory(in_dir)) throw sqnlab::IoError("'" + in_dir + "' is not a file or directory");
    for (const auto& entry : fs::recursive_directory_iterator(in_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto part = sqnlab::read_csv(f.string());
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto cells = sqnlab::bb_fraction_report(records);
  std::printf("%-10s %6s %-14s %-10s %6s %8s\n", "experiment", "n", "param_set", "algo", "runs", "bb(%)");
  for (const auto& c : cells)
    std::printf("%-10s %6lld %-14s %-10s %6llu %8s\n", c.experiment.c_str(), static_cast<long long>(c.n),
                c.param_set.c_str(), c.algo.c_str(), static_cast<unsigned long long>(c.runs),
                std::isnan(c.percent) ? "NA" : cell(c.percent, "%.2f").c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic quasi-Newton benchmark runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sqnlab::kToolVersion);

  auto* bench = app.add_subcommand("bench", "run a preset benchmark battery");
  bench->require_subcommand(1);

  std::uint64_t seed = 2;
  std::size_t runs = 20;
  std::size_t workers = 0;
  std::string out;
  bool quiet = false;
  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "master seed (SQNLAB_SEED overrides)");
    cmd->add_option("--runs", runs, "repetitions per algorithm")->check(CLI::PositiveNumber);
    cmd->add_option("--workers", workers, "worker threads (0: hardware concurrency)");
    cmd->add_option("--out", out, "output directory for results.csv/json");
    cmd->add_flag("--quiet", quiet, "no per-run progress on stderr");
  };

  auto* quad = bench->add_subcommand("quadratic", "noisy diagonal quadratic, batch 5, rho = 0.01");
  long long quad_n = 500;
  std::string set_text = "0.1,1";
  quad->add_option("--n", quad_n, "dimension")->required();
  quad->add_option("--set", set_text, "comma-separated diagonal values")->required();
  common(quad);

  auto* svm = bench->add_subcommand("svm", "sigmoid-loss SVM under randomized stopping");
  long long svm_n = 500;
  std::uint64_t nsfo = 5000;
  std::string algos;
  svm->add_option("--n", svm_n, "dimension")->required();
  svm->add_option("--nsfo", nsfo, "SFO budget")->required();
  svm->add_option("--algos", algos, "comma-separated subset of RSG,RSDBFGS,RSCBB");
  common(svm);

  auto* run = app.add_subcommand("run", "run an experiment described by a JSON config");
  std::string config_path;
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out, "output directory (overrides the config)");
  run->add_flag("--quiet", quiet, "no per-run progress on stderr");

  auto* report = app.add_subcommand("report", "summaries of written results");
  report->require_subcommand(1);
  auto* bbfrac = report->add_subcommand("bbfrac", "percentage of BB steps per cell");
  std::string in_dir;
  bbfrac->add_option("--in", in_dir, "results directory or CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidConfig;
  }

  try {
    const auto env_seed = seed_from_env();
    if (env_seed) seed = *env_seed;
    if (quad->parsed()) {
      auto spec = sqnlab::quadratic_preset(quad_n, parse_set(set_text), seed);
      spec.runs = runs;
      spec.workers = workers;
      return execute(spec, out, false, quiet);
    }
    if (svm->parsed()) {
      auto spec = sqnlab::svm_preset(svm_n, nsfo, seed);
      if (!algos.empty()) {
        std::vector<std::string> names;
        std::stringstream ss(algos);
        for (std::string a; std::getline(ss, a, ',');) names.push_back(a);
        spec = sqnlab::only_algorithms(spec, names);
        if (spec.algorithms.size() != names.size()) throw sqnlab::InvalidConfig("--algos: unknown algorithm name");
      }
      spec.runs = runs;
      spec.workers = workers;
      return execute(spec, out, true, quiet);
    }
    if (run->parsed()) {
      auto spec = sqnlab::load_experiment(config_path);
      if (env_seed) spec.master_seed = *env_seed;
      return execute(spec, out, std::holds_alternative<sqnlab::SvmSpec>(spec.problem), quiet);
    }
    if (bbfrac->parsed()) return report_bbfrac(in_dir);
  } catch (const sqnlab::InvalidConfig& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return kExitInvalidConfig;
  } catch (const sqnlab::InvalidStepsize& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
