#pragma once

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "sqnlab/core/json.hpp"
#include "sqnlab/harness/experiment.hpp"
#include "sqnlab/oracle/problem_io.hpp"

namespace sqnlab {

inline constexpr const char* kCsvHeader =
    "experiment,algo,n,param_set,run,n_sfo,grad_norm,grad_norm_sq,err,bb_fraction,resets,cpu_seconds";

// ---- configuration ---------------------------------------------------------

inline Json to_json(const StepsizeSchedule& s) {
  if (const auto* h = std::get_if<HarmonicStep>(&s.rule())) return {{"rule", "harmonic"}, {"a", h->a}, {"b", h->b}};
  if (const auto* t = std::get_if<TabulatedStep>(&s.rule())) return {{"rule", "tabulated"}, {"values", t->values}};
  return {{"rule", "constant"}, {"alpha", std::get<ConstantStep>(s.rule()).alpha}};
}

inline StepsizeSchedule stepsize_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rule") || !j.at("rule").is_string())
    throw InvalidConfig("stepsize: missing string key 'rule'");
  const auto rule = j.at("rule").get<std::string>();
  if (rule == "harmonic") {
    StrictObject o(j, "stepsize", {"rule", "a", "b"});
    return HarmonicStep{o.get<double>("a"), o.has("b") ? o.get<double>("b") : 0.0};
  }
  if (rule == "constant") {
    StrictObject o(j, "stepsize", {"rule", "alpha"});
    return ConstantStep{o.get<double>("alpha")};
  }
  if (rule == "tabulated") {
    StrictObject o(j, "stepsize", {"rule", "values"});
    return TabulatedStep{o.get<std::vector<double>>("values")};
  }
  throw InvalidConfig("stepsize.rule must be harmonic, constant or tabulated, got '" + rule + "'");
}

inline Json to_json(const TheoryConstants& c) {
  return {{"L", c.L}, {"sigma", c.sigma}, {"m", c.m}, {"M", c.M}, {"D_f", c.D_f}, {"D_tilde", c.D_tilde}};
}

inline TheoryConstants theory_constants_from_json(const Json& j) {
  StrictObject o(j, "stopping", {"L", "sigma", "m", "M", "D_f", "D_tilde"});
  TheoryConstants c;
  o.read("L", c.L);
  o.read("sigma", c.sigma);
  o.read("m", c.m);
  o.read("M", c.M);
  o.read("D_f", c.D_f);
  o.read("D_tilde", c.D_tilde);
  return c;
}

inline Json to_json(const AlgorithmSpec& a) {
  const RunConfig& c = a.config;
  Json j = {
      {"name", a.name},
      {"param_set", a.param_set},
      {"updater", std::string(to_string(c.updater))},
      {"stepsize", to_json(c.stepsize)},
      {"step_policy",
       {{"kind", a.step.kind == StepPolicy::Kind::Fixed ? "fixed" : "inverse_lipschitz"}, {"factor", a.step.factor}}},
      {"batch", c.batch.m},
      {"safeguard", c.safeguard.zeta},
      {"max_iterations", c.max_iterations},
      {"rho", c.rho ? Json(*c.rho) : Json(nullptr)},
      {"randomized", a.randomized},
      {"sfo_budget", a.sfo_budget},
      {"b1_scale", c.b1_scale},
      {"divergence_threshold", c.divergence_threshold},
      {"audit_interval", c.audit_interval},
      {"sdbfgs", {{"delta", c.sdbfgs.delta}, {"skip_tol", c.sdbfgs.skip_tol}}},
      {"res", {{"delta_hat", c.res.delta_hat}, {"gamma", c.res.gamma}, {"skip_tol", c.res.skip_tol}}},
      {"cbb",
       {{"q", c.cbb.q},
        {"lambda_min", c.cbb.lambda_min},
        {"lambda_max", c.cbb.lambda_max},
        {"variant", c.cbb.variant == BbVariant::A ? "A" : "B"}}},
  };
  j["stopping"] = a.stopping ? to_json(*a.stopping) : Json(nullptr);
  return j;
}

inline AlgorithmSpec algorithm_from_json(const Json& j) {
  StrictObject o(j, "algorithm",
                 {"name", "param_set", "updater", "stepsize", "step_policy", "batch", "safeguard", "max_iterations",
                  "rho", "randomized", "sfo_budget", "b1_scale", "divergence_threshold", "audit_interval", "sdbfgs",
                  "res", "cbb", "stopping"});
  AlgorithmSpec a;
  a.name = o.get<std::string>("name");
  o.read("param_set", a.param_set);
  RunConfig& c = a.config;
  if (o.has("updater")) c.updater = updater_from_string(o.get<std::string>("updater"));
  if (o.has("stepsize")) c.stepsize = stepsize_from_json(o.at("stepsize"));
  if (o.has("step_policy")) {
    StrictObject p(o.at("step_policy"), "algorithm.step_policy", {"kind", "factor"});
    const auto kind = p.has("kind") ? p.get<std::string>("kind") : std::string("fixed");
    if (kind == "fixed") {
      a.step.kind = StepPolicy::Kind::Fixed;
    } else if (kind == "inverse_lipschitz") {
      a.step.kind = StepPolicy::Kind::InverseLipschitz;
    } else {
      throw InvalidConfig("step_policy.kind must be fixed or inverse_lipschitz, got '" + kind + "'");
    }
    p.read("factor", a.step.factor);
  }
  o.read("batch", c.batch.m);
  o.read("safeguard", c.safeguard.zeta);
  o.read("max_iterations", c.max_iterations);
  if (o.has("rho")) c.rho = o.get<double>("rho");
  o.read("randomized", a.randomized);
  o.read("sfo_budget", a.sfo_budget);
  o.read("b1_scale", c.b1_scale);
  o.read("divergence_threshold", c.divergence_threshold);
  o.read("audit_interval", c.audit_interval);
  if (o.has("sdbfgs")) {
    StrictObject s(o.at("sdbfgs"), "algorithm.sdbfgs", {"delta", "skip_tol"});
    s.read("delta", c.sdbfgs.delta);
    s.read("skip_tol", c.sdbfgs.skip_tol);
  }
  if (o.has("res")) {
    StrictObject s(o.at("res"), "algorithm.res", {"delta_hat", "gamma", "skip_tol"});
    s.read("delta_hat", c.res.delta_hat);
    s.read("gamma", c.res.gamma);
    s.read("skip_tol", c.res.skip_tol);
  }
  if (o.has("cbb")) {
    StrictObject s(o.at("cbb"), "algorithm.cbb", {"q", "lambda_min", "lambda_max", "variant"});
    s.read("q", c.cbb.q);
    s.read("lambda_min", c.cbb.lambda_min);
    s.read("lambda_max", c.cbb.lambda_max);
    if (s.has("variant")) {
      const auto v = s.get<std::string>("variant");
      if (v != "A" && v != "B") throw InvalidConfig("cbb.variant must be A or B, got '" + v + "'");
      c.cbb.variant = v == "A" ? BbVariant::A : BbVariant::B;
    }
  }
  if (o.has("stopping")) a.stopping = theory_constants_from_json(o.at("stopping"));
  return a;
}

inline Json to_json(const ExperimentSpec& s) {
  Json algos = Json::array();
  for (const auto& a : s.algorithms) algos.push_back(to_json(a));
  Json problem = to_json(s.problem);
  if (s.problem_seed_follows_master) problem.erase("seed");
  return {{"name", s.name},       {"problem", problem}, {"algorithms", algos},
          {"runs", s.runs},       {"seed", s.master_seed}, {"workers", s.workers},
          {"out", s.out_dir}};
}

/// Experiment config; a problem without "seed" uses the master seed.
inline ExperimentSpec experiment_from_json(const Json& j) {
  StrictObject o(j, "experiment", {"name", "problem", "algorithms", "runs", "seed", "workers", "out"});
  ExperimentSpec s;
  o.read("name", s.name);
  s.problem = problem_spec_from_json(o.at("problem"));
  s.problem_seed_follows_master = !o.at("problem").contains("seed");
  o.read("runs", s.runs);
  o.read("seed", s.master_seed);
  o.read("workers", s.workers);
  o.read("out", s.out_dir);
  const Json& algos = o.at("algorithms");
  if (!algos.is_array()) throw InvalidConfig("experiment.algorithms must be an array");
  for (const auto& a : algos) s.algorithms.push_back(algorithm_from_json(a));
  s.validate();
  return s;
}

inline ExperimentSpec load_experiment(const std::string& path) { return experiment_from_json(read_json_file(path)); }

// ---- results ---------------------------------------------------------------

inline Json to_json(const RunRecord& r) {
  return {{"experiment", r.experiment},
          {"algo", r.algo},
          {"n", r.n},
          {"param_set", r.param_set},
          {"run", r.run},
          {"seed", r.seed},
          {"updater", r.updater ? Json(std::string(to_string(*r.updater))) : Json(nullptr)},
          {"status", r.status},
          {"message", r.message},
          {"iterations", r.iterations},
          {"stopping_index", r.stopping_index},
          {"n_sfo", r.n_sfo},
          {"grad_norm", number_or_null(r.grad_norm)},
          {"grad_norm_sq", number_or_null(r.grad_norm_sq)},
          {"err", number_or_null(r.err)},
          {"bb_fraction", number_or_null(r.bb_fraction)},
          {"resets", r.resets},
          {"cpu_seconds", number_or_null(r.cpu_seconds)}};
}

inline RunRecord record_from_json(const Json& j) {
  RunRecord r;
  r.experiment = j.at("experiment").get<std::string>();
  r.algo = j.at("algo").get<std::string>();
  r.n = j.at("n").get<Index>();
  r.param_set = j.at("param_set").get<std::string>();
  r.run = j.at("run").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("updater").is_null()) r.updater = updater_from_string(j.at("updater").get<std::string>());
  r.status = j.at("status").get<std::string>();
  r.message = j.at("message").get<std::string>();
  r.iterations = j.at("iterations").get<std::uint64_t>();
  r.stopping_index = j.at("stopping_index").get<std::uint64_t>();
  r.n_sfo = j.at("n_sfo").get<std::uint64_t>();
  r.grad_norm = number_or_nan(j.at("grad_norm"));
  r.grad_norm_sq = number_or_nan(j.at("grad_norm_sq"));
  r.err = number_or_nan(j.at("err"));
  r.bb_fraction = number_or_nan(j.at("bb_fraction"));
  r.resets = j.at("resets").get<std::uint64_t>();
  r.cpu_seconds = number_or_nan(j.at("cpu_seconds"));
  return r;
}

inline Json to_json(const AggregateStats& a) {
  return {{"algo", a.algo},
          {"param_set", a.param_set},
          {"runs", a.runs},
          {"completed", a.completed},
          {"divergent", a.divergent},
          {"capped", a.capped},
          {"failed", a.failed},
          {"mean_grad_norm", number_or_null(a.mean_grad_norm)},
          {"var_grad_norm", number_or_null(a.var_grad_norm)},
          {"mean_grad_norm_sq", number_or_null(a.mean_grad_norm_sq)},
          {"var_grad_norm_sq", number_or_null(a.var_grad_norm_sq)},
          {"mean_n_sfo", number_or_null(a.mean_n_sfo)},
          {"mean_cpu_seconds", number_or_null(a.mean_cpu_seconds)},
          {"mean_err", number_or_null(a.mean_err)},
          {"mean_bb_fraction", number_or_null(a.mean_bb_fraction)},
          {"bb_runs", a.bb_runs}};
}

inline AggregateStats aggregate_from_json(const Json& j) {
  AggregateStats a;
  a.algo = j.at("algo").get<std::string>();
  a.param_set = j.at("param_set").get<std::string>();
  a.runs = j.at("runs").get<std::uint64_t>();
  a.completed = j.at("completed").get<std::uint64_t>();
  a.divergent = j.at("divergent").get<std::uint64_t>();
  a.capped = j.at("capped").get<std::uint64_t>();
  a.failed = j.at("failed").get<std::uint64_t>();
  a.mean_grad_norm = number_or_nan(j.at("mean_grad_norm"));
  a.var_grad_norm = number_or_nan(j.at("var_grad_norm"));
  a.mean_grad_norm_sq = number_or_nan(j.at("mean_grad_norm_sq"));
  a.var_grad_norm_sq = number_or_nan(j.at("var_grad_norm_sq"));
  a.mean_n_sfo = number_or_nan(j.at("mean_n_sfo"));
  a.mean_cpu_seconds = number_or_nan(j.at("mean_cpu_seconds"));
  a.mean_err = number_or_nan(j.at("mean_err"));
  a.mean_bb_fraction = number_or_nan(j.at("mean_bb_fraction"));
  a.bb_runs = j.at("bb_runs").get<std::uint64_t>();
  return a;
}

inline Json to_json(const ExperimentResult& r) {
  Json records = Json::array();
  for (const auto& rec : r.records) records.push_back(to_json(rec));
  Json aggregates = Json::array();
  for (const auto& a : r.aggregates) aggregates.push_back(to_json(a));
  return {{"tool", "sqnlab"},
          {"version", kToolVersion},
          {"variance", "sample variance, N_run - 1 denominator"},
          {"config", to_json(r.spec)},
          {"problem", to_json(r.spec.effective_problem())},
          {"lipschitz", number_or_null(r.lipschitz)},
          {"records", records},
          {"aggregates", aggregates}};
}

inline ExperimentResult result_from_json(const Json& j) {
  ExperimentResult r;
  r.spec = experiment_from_json(j.at("config"));
  r.lipschitz = number_or_nan(j.at("lipschitz"));
  for (const auto& rec : j.at("records")) r.records.push_back(record_from_json(rec));
  for (const auto& a : j.at("aggregates")) r.aggregates.push_back(aggregate_from_json(a));
  return r;
}

/// Shortest decimal that reads back to the same double; NaN as NA.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string csv_row(const RunRecord& r) {
  std::ostringstream out;
  out << r.experiment << ',' << r.algo << ',' << r.n << ',' << r.param_set << ',' << r.run << ',' << r.n_sfo << ','
      << format_double(r.grad_norm) << ',' << format_double(r.grad_norm_sq) << ',' << format_double(r.err) << ','
      << format_double(r.bb_fraction) << ',' << r.resets << ',' << format_double(r.cpu_seconds);
  return out.str();
}

inline void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::string text = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) text += csv_row(r) + "\n";
  write_text_file(path, text);
}

inline void emit_json(const ExperimentResult& result, const std::string& path) {
  write_text_file(path, to_json(result).dump(2) + "\n");
}

inline ExperimentResult read_result_json(const std::string& path) { return result_from_json(read_json_file(path)); }

inline double parse_csv_double(const std::string& field) {
  if (field == "NA") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(field, &used);
  if (used != field.size()) throw std::invalid_argument(field);
  return v;
}

/// Reads records written by emit_csv; the updater is not part of the CSV schema.
inline std::vector<RunRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw InvalidConfig(path + ": unexpected CSV header");
  std::vector<RunRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 12) throw InvalidConfig(path + ":" + std::to_string(line_no) + ": expected 12 fields");
    try {
      RunRecord r;
      r.experiment = f[0];
      r.algo = f[1];
      r.n = std::stoll(f[2]);
      r.param_set = f[3];
      r.run = std::stoull(f[4]);
      r.n_sfo = std::stoull(f[5]);
      r.grad_norm = parse_csv_double(f[6]);
      r.grad_norm_sq = parse_csv_double(f[7]);
      r.err = parse_csv_double(f[8]);
      r.bb_fraction = parse_csv_double(f[9]);
      r.resets = std::stoull(f[10]);
      r.cpu_seconds = parse_csv_double(f[11]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InvalidConfig(path + ":" + std::to_string(line_no) + ": malformed field");
    }
  }
  return out;
}

// ---- BB-step share ---------------------------------------------------------

struct BbFractionCell {
  std::string experiment;
  Index n = 0;
  std::string param_set;
  std::string algo;
  std::uint64_t runs = 0;
  std::uint64_t runs_with_boundaries = 0;
  double percent = std::numeric_limits<double>::quiet_NaN();  // NaN when no run reached a cycle boundary
};

/**
 * Percentage of cycle boundaries that took the BB value, averaged over runs,
 * per (experiment, n, param_set, algorithm). Groups are those run with the
 * cyclic BB updater, or (for records read from CSV) with any defined share.
 */
inline std::vector<BbFractionCell> bb_fraction_report(const std::vector<RunRecord>& records) {
  using Key = std::tuple<std::string, Index, std::string, std::string>;
  std::map<Key, std::pair<BbFractionCell, RunningStats>> groups;
  std::map<Key, bool> relevant;
  for (const auto& r : records) {
    const Key key{r.experiment, r.n, r.param_set, r.algo};
    auto& [cell, stats] = groups[key];
    cell.experiment = r.experiment;
    cell.n = r.n;
    cell.param_set = r.param_set;
    cell.algo = r.algo;
    ++cell.runs;
    relevant[key] = relevant[key] || (r.updater && *r.updater == UpdaterKind::Scbb) || !std::isnan(r.bb_fraction);
    if (!std::isnan(r.bb_fraction) && !r.failed()) stats.add(100.0 * r.bb_fraction);
  }
  std::vector<BbFractionCell> out;
  for (auto& [key, entry] : groups) {
    if (!relevant[key]) continue;
    auto& [cell, stats] = entry;
    cell.runs_with_boundaries = stats.count();
    cell.percent = stats.mean();
    out.push_back(cell);
  }
  return out;
}

/// Writes results.csv, results.json and problem.json into dir (created if needed).
inline void write_outputs(const ExperimentResult& result, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  emit_csv(result.records, (base / "results.csv").string());
  emit_json(result, (base / "results.json").string());
  save_problem_spec(result.spec.effective_problem(), (base / "problem.json").string());
}

}  // namespace sqnlab
