#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "sqnlab/core/errors.hpp"

namespace sqnlab {

/// alpha_k = a / (b + k); divergent sum, square-summable.
struct HarmonicStep {
  double a = 1.0;
  double b = 0.0;
};

struct ConstantStep {
  double alpha = 0.1;
};

/// alpha_k = values[k-1]; the last value repeats past the end.
struct TabulatedStep {
  std::vector<double> values;
};

class StepsizeSchedule {
 public:
  StepsizeSchedule() = default;
  StepsizeSchedule(HarmonicStep h) : rule_(h) {}  // NOLINT(google-explicit-constructor)
  StepsizeSchedule(ConstantStep c) : rule_(c) {}  // NOLINT(google-explicit-constructor)
  StepsizeSchedule(TabulatedStep t) : rule_(std::move(t)) {}  // NOLINT(google-explicit-constructor)

  static StepsizeSchedule harmonic(double a, double b) { return HarmonicStep{a, b}; }
  static StepsizeSchedule constant(double alpha) { return ConstantStep{alpha}; }

  /// Stepsize of iteration k >= 1.
  double operator()(std::uint64_t k) const {
    if (const auto* h = std::get_if<HarmonicStep>(&rule_)) return h->a / (h->b + static_cast<double>(k));
    if (const auto* t = std::get_if<TabulatedStep>(&rule_))
      return t->values[std::min<std::size_t>(k - 1, t->values.size() - 1)];
    return std::get<ConstantStep>(rule_).alpha;
  }

  bool is_constant() const noexcept { return std::holds_alternative<ConstantStep>(rule_); }
  const std::variant<HarmonicStep, ConstantStep, TabulatedStep>& rule() const noexcept { return rule_; }

  void validate() const {
    if (const auto* h = std::get_if<HarmonicStep>(&rule_)) {
      if (!(h->a > 0.0) || !(h->b >= 0.0)) throw InvalidConfig("harmonic stepsize needs a > 0, b >= 0");
    } else if (const auto* t = std::get_if<TabulatedStep>(&rule_)) {
      if (t->values.empty()) throw InvalidConfig("tabulated stepsize needs at least one value");
      for (double v : t->values)
        if (!(v > 0.0)) throw InvalidConfig("tabulated stepsizes must be positive");
    } else if (!(std::get<ConstantStep>(rule_).alpha > 0.0)) {
      throw InvalidConfig("constant stepsize must be positive");
    }
  }

 private:
  std::variant<HarmonicStep, ConstantStep, TabulatedStep> rule_ = HarmonicStep{};
};

/// Constant mini-batch size m_k = m.
struct BatchSchedule {
  std::uint64_t m = 1;
  std::uint64_t operator()(std::uint64_t /*k*/) const noexcept { return m; }
};

/// Constant safeguard zeta_k = zeta.
struct SafeguardSchedule {
  double zeta = 0.0;
  double operator()(std::uint64_t /*k*/) const noexcept { return zeta; }
};

}  // namespace sqnlab
