#pragma once

#include <string>
#include <variant>

#include "sqnlab/core/json.hpp"
#include "sqnlab/oracle/quadratic.hpp"
#include "sqnlab/oracle/sigmoid_svm.hpp"

namespace sqnlab {

/// Parameters of either benchmark problem; generating from it is deterministic.
using ProblemSpec = std::variant<QuadraticSpec, SvmSpec>;

inline Json to_json(const QuadraticSpec& s) {
  return {{"type", "quadratic"},
          {"n", s.n},
          {"spectrum_set", s.spectrum_set},
          {"noise", s.noise},
          {"seed", s.seed}};
}

inline Json to_json(const SvmSpec& s) {
  return {{"type", "svm"},           {"n", s.n},
          {"lambda", s.lambda},      {"sparsity", s.sparsity},
          {"test_size", s.test_size}, {"eval_size", s.eval_size},
          {"init_scale", s.init_scale}, {"seed", s.seed},
          {"eval_seed", s.eval_seed}};
}

inline Json to_json(const ProblemSpec& s) {
  return std::visit([](const auto& v) { return to_json(v); }, s);
}

inline QuadraticSpec quadratic_spec_from_json(const Json& j) {
  StrictObject o(j, "problem", {"type", "n", "spectrum_set", "noise", "seed"});
  QuadraticSpec s;
  o.read("n", s.n);
  o.read("spectrum_set", s.spectrum_set);
  o.read("noise", s.noise);
  o.read("seed", s.seed);
  if (s.n < 1) throw InvalidConfig("problem.n must be positive");
  if (s.spectrum_set.empty()) throw InvalidConfig("problem.spectrum_set must not be empty");
  for (double v : s.spectrum_set)
    if (!(v > 0.0)) throw InvalidConfig("problem.spectrum_set entries must be positive");
  if (!(s.noise >= 0.0)) throw InvalidConfig("problem.noise must be nonnegative");
  return s;
}

inline SvmSpec svm_spec_from_json(const Json& j) {
  StrictObject o(j, "problem",
                 {"type", "n", "lambda", "sparsity", "test_size", "eval_size", "init_scale", "seed", "eval_seed"});
  SvmSpec s;
  o.read("n", s.n);
  o.read("lambda", s.lambda);
  o.read("sparsity", s.sparsity);
  o.read("test_size", s.test_size);
  o.read("eval_size", s.eval_size);
  o.read("init_scale", s.init_scale);
  o.read("seed", s.seed);
  o.read("eval_seed", s.eval_seed);
  if (s.n < 2) throw InvalidConfig("problem.n must be at least 2");
  if (!(s.lambda > 0.0)) throw InvalidConfig("problem.lambda must be positive");
  if (!(s.sparsity > 0.0 && s.sparsity <= 1.0)) throw InvalidConfig("problem.sparsity must be in (0, 1]");
  if (s.test_size < 1 || s.eval_size < 1) throw InvalidConfig("problem.test_size and eval_size must be positive");
  return s;
}

inline ProblemSpec problem_spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw InvalidConfig("problem: missing string key 'type'");
  const auto type = j.at("type").get<std::string>();
  if (type == "quadratic") return quadratic_spec_from_json(j);
  if (type == "svm") return svm_spec_from_json(j);
  throw InvalidConfig("problem.type must be 'quadratic' or 'svm', got '" + type + "'");
}

inline void save_problem_spec(const ProblemSpec& s, const std::string& path) {
  write_text_file(path, to_json(s).dump(2) + "\n");
}

inline ProblemSpec load_problem_spec(const std::string& path) { return problem_spec_from_json(read_json_file(path)); }

}  // namespace sqnlab
