#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "sqnlab/core/errors.hpp"
#include "sqnlab/core/linalg.hpp"
#include "sqnlab/core/rng.hpp"
#include "sqnlab/oracle/problem.hpp"

namespace sqnlab {

struct SvmSpec {
  Index n = 500;
  double lambda = 0.01;
  double sparsity = 0.05;
  std::size_t test_size = 75000;
  std::size_t eval_size = 75000;
  double init_scale = 5.0;
  std::uint64_t seed = 1;
  std::uint64_t eval_seed = 2;
};

/// One labeled feature vector with a fixed number of nonzeros.
struct SvmSample {
  std::vector<Index> index;
  std::vector<double> value;
  double label = 1.0;  // +1 or -1

  double dot(const Vector& x) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < index.size(); ++j) acc += value[j] * x[index[j]];
    return acc;
  }
};

/// Flat storage for a large fixed set of samples (test and evaluation sets).
class SvmSampleSet {
 public:
  SvmSampleSet() = default;
  explicit SvmSampleSet(std::size_t nnz) : nnz_(nnz) {}

  void push_back(const SvmSample& s) {
    index_.insert(index_.end(), s.index.begin(), s.index.end());
    value_.insert(value_.end(), s.value.begin(), s.value.end());
    label_.push_back(static_cast<std::int8_t>(s.label > 0 ? 1 : -1));
  }
  void reserve(std::size_t count) {
    index_.reserve(count * nnz_);
    value_.reserve(count * nnz_);
    label_.reserve(count);
  }

  std::size_t size() const noexcept { return label_.size(); }
  std::size_t nnz() const noexcept { return nnz_; }
  double label(std::size_t i) const { return label_[i]; }

  double dot(std::size_t i, const Vector& x) const {
    double acc = 0.0;
    const std::size_t base = i * nnz_;
    for (std::size_t j = 0; j < nnz_; ++j) acc += value_[base + j] * x[index_[base + j]];
    return acc;
  }

  void axpy(std::size_t i, double a, Vector& out) const {
    const std::size_t base = i * nnz_;
    for (std::size_t j = 0; j < nnz_; ++j) out[index_[base + j]] += a * value_[base + j];
  }

 private:
  std::size_t nnz_ = 0;
  std::vector<Index> index_;
  std::vector<double> value_;
  std::vector<std::int8_t> label_;
};

/**
 * Sigmoid-loss linear classifier:
 *
 *   f(x) = E_{u,v}[1 - tanh(v <x,u>)] + lambda ||x||^2
 *
 * u has ceil(sparsity * n) nonzeros (indices without replacement, values
 * U[0,1]); v = sign(<x_true, u>) with x_true ~ U[-1,1]^n, sign(0) := +1.
 * The instance owns a test set for misclassification error and a fixed
 * evaluation set whose sample average stands in for the full gradient.
 */
class SigmoidSvmProblem {
 public:
  using Sample = SvmSample;

  static SigmoidSvmProblem generate(const SvmSpec& spec) {
    if (spec.n < 2) throw InvalidConfig("svm: n must be at least 2");
    if (!(spec.lambda > 0.0)) throw InvalidConfig("svm: lambda must be positive");
    if (!(spec.sparsity > 0.0 && spec.sparsity <= 1.0)) throw InvalidConfig("svm: sparsity must be in (0,1]");
    if (spec.eval_size == 0) throw InvalidConfig("svm: eval_size must be positive");
    SigmoidSvmProblem p;
    p.spec_ = spec;
    p.nnz_ = nonzeros_for(spec.n, spec.sparsity);
    SeededRng truth_rng(spec.seed, 0);
    p.x_true_.resize(spec.n);
    for (Index i = 0; i < spec.n; ++i) p.x_true_[i] = truth_rng.uniform(-1.0, 1.0);
    SeededRng init_rng(spec.seed, 1);
    p.x_init_.resize(spec.n);
    for (Index i = 0; i < spec.n; ++i) p.x_init_[i] = spec.init_scale * init_rng.uniform(0.0, 1.0);
    SeededRng test_rng(spec.seed, 2);
    p.test_ = std::make_shared<const SvmSampleSet>(p.draw_set(spec.test_size, test_rng));
    SeededRng eval_rng(spec.eval_seed, 3);
    p.eval_ = std::make_shared<const SvmSampleSet>(p.draw_set(spec.eval_size, eval_rng));
    return p;
  }

  /// ceil(sparsity * n) with a guard against 0.05 * 500 rounding above 25.
  static std::size_t nonzeros_for(Index n, double sparsity) {
    const double raw = sparsity * static_cast<double>(n);
    const auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    return std::clamp<std::size_t>(k, 1, static_cast<std::size_t>(n));
  }

  Index dim() const noexcept { return spec_.n; }
  const SvmSpec& spec() const noexcept { return spec_; }
  double lambda() const noexcept { return spec_.lambda; }
  std::size_t nonzeros() const noexcept { return nnz_; }
  const Vector& ground_truth() const noexcept { return x_true_; }
  const Vector& initial_point() const noexcept { return x_init_; }
  const SvmSampleSet& test_set() const noexcept { return *test_; }
  const SvmSampleSet& eval_set() const noexcept { return *eval_; }

  Sample draw_sample(SeededRng& rng) const {
    SvmSample s;
    s.index.reserve(nnz_);
    s.value.reserve(nnz_);
    // Floyd's algorithm: nnz_ distinct indices from [0, n).
    const auto n = static_cast<std::size_t>(spec_.n);
    for (std::size_t j = n - nnz_; j < n; ++j) {
      const auto t = static_cast<Index>(rng.index(j + 1));
      const bool seen = std::find(s.index.begin(), s.index.end(), t) != s.index.end();
      s.index.push_back(seen ? static_cast<Index>(j) : t);
    }
    for (std::size_t j = 0; j < nnz_; ++j) s.value.push_back(rng.uniform(0.0, 1.0));
    s.label = s.dot(x_true_) >= 0.0 ? 1.0 : -1.0;
    return s;
  }

  /// 2 lambda x - v sech^2(v <x,u>) u
  Vector stochastic_gradient(const Vector& x, const Sample& s) const {
    Vector g = 2.0 * spec_.lambda * x;
    const double t = std::tanh(s.label * s.dot(x));
    const double c = s.label * (1.0 - t * t);
    for (std::size_t j = 0; j < s.index.size(); ++j) g[s.index[j]] -= c * s.value[j];
    return g;
  }

  double sample_loss(const Vector& x, const Sample& s) const {
    return 1.0 - std::tanh(s.label * s.dot(x)) + spec_.lambda * x.squaredNorm();
  }

  /// Sample-average gradient over the instance's fixed evaluation set.
  Vector full_gradient(const Vector& x) const { return set_gradient(*eval_, x); }

  double objective_estimate(const Vector& x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < eval_->size(); ++i) acc += 1.0 - std::tanh(eval_->label(i) * eval_->dot(i, x));
    return acc / static_cast<double>(eval_->size()) + spec_.lambda * x.squaredNorm();
  }

  /// Fraction of the test set with sign(<x,u>) != v; sign(0) counts as an error.
  double misclassification_error(const Vector& x) const {
    require_same_dim(dim(), x.size(), "misclassification_error");
    if (test_->size() == 0) throw InvalidConfig("misclassification_error: empty test set");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < test_->size(); ++i)
      if (!(test_->label(i) * test_->dot(i, x) > 0.0)) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(test_->size());
  }

  SvmSampleSet draw_set(std::size_t count, SeededRng& rng) const {
    SvmSampleSet set(nnz_);
    set.reserve(count);
    for (std::size_t i = 0; i < count; ++i) set.push_back(draw_sample(rng));
    return set;
  }

  Vector set_gradient(const SvmSampleSet& set, const Vector& x) const {
    require_same_dim(dim(), x.size(), "svm gradient");
    Vector acc = Vector::Zero(dim());
    for (std::size_t i = 0; i < set.size(); ++i) {
      const double v = set.label(i);
      const double t = std::tanh(v * set.dot(i, x));
      set.axpy(i, -v * (1.0 - t * t), acc);
    }
    acc /= static_cast<double>(set.size());
    acc.noalias() += 2.0 * spec_.lambda * x;
    return acc;
  }

 private:
  SigmoidSvmProblem() = default;

  SvmSpec spec_;
  std::size_t nnz_ = 1;
  Vector x_true_;
  Vector x_init_;
  std::shared_ptr<const SvmSampleSet> test_;
  std::shared_ptr<const SvmSampleSet> eval_;
};

/// Gradient estimate over eval_size draws fixed by eval_seed (same stream as the instance's own set).
inline Vector estimated_gradient_svm(const SigmoidSvmProblem& p, const Vector& x, std::size_t eval_size,
                                     std::uint64_t eval_seed) {
  if (eval_size == 0) throw InvalidConfig("estimated_gradient_svm: eval_size must be positive");
  SeededRng rng(eval_seed, 3);
  return p.set_gradient(p.draw_set(eval_size, rng), x);
}

inline double misclassification_error(const SigmoidSvmProblem& p, const Vector& x) {
  return p.misclassification_error(x);
}

}  // namespace sqnlab
