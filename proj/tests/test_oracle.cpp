#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "sqnlab/oracle/problem.hpp"
#include "sqnlab/oracle/problem_io.hpp"
#include "sqnlab/oracle/quadratic.hpp"
#include "sqnlab/oracle/sigmoid_svm.hpp"
#include "test_support.hpp"

using namespace sqnlab;

namespace {

/// f(x) = b^T x with an exact oracle.
struct LinearProblem {
  using Sample = int;
  Vector b;
  Index dim() const { return b.size(); }
  Sample draw_sample(SeededRng&) const { return 0; }
  Vector stochastic_gradient(const Vector&, const Sample&) const { return b; }
  double sample_loss(const Vector& x, const Sample&) const { return b.dot(x); }
};

QuadraticProblem small_quadratic() {
  return QuadraticProblem((Vector(2) << 1.0, 2.0).finished(), Vector::Ones(2), 0.1);
}

SvmSpec small_svm_spec() {
  SvmSpec s;
  s.n = 60;
  s.test_size = 2000;
  s.eval_size = 2000;
  s.seed = 4;
  return s;
}

}  // namespace

static_assert(StochasticProblem<QuadraticProblem>);
static_assert(StochasticProblem<SigmoidSvmProblem>);
static_assert(HasSampleLoss<LinearProblem>);
static_assert(HasStationaryPoint<QuadraticProblem> && !HasStationaryPoint<SigmoidSvmProblem>);

TEST(MinibatchGradient, IdenticalSamplesAverageToOneSample) {
  const auto p = small_quadratic();
  SeededRng rng(1, 0);
  const Vector xi = p.draw_sample(rng);
  SampleBatch<Vector> batch{{xi, xi, xi, xi}};
  OracleCounter counter;
  const Vector x = (Vector(2) << 0.3, -1.2).finished();
  const Vector g = minibatch_gradient(p, x, batch, counter);
  EXPECT_LE((g - p.stochastic_gradient(x, xi)).norm(), 1e-15);
  EXPECT_EQ(counter.n_sfo, 4u);
}

TEST(MinibatchGradient, ZeroPerturbationReducesToAxMinusB) {
  const auto p = small_quadratic();
  SampleBatch<Vector> batch{{Vector::Zero(2)}};
  OracleCounter counter;
  const Vector g = minibatch_gradient(p, Vector::Ones(2), batch, counter);
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[1], 1.0);
}

TEST(MinibatchGradient, RejectsWrongDimensionAndEmptyBatch) {
  const auto p = small_quadratic();
  OracleCounter counter;
  EXPECT_THROW(minibatch_gradient(p, Vector::Ones(3), SampleBatch<Vector>{{Vector::Zero(2)}}, counter),
               DimensionMismatch);
  EXPECT_THROW(minibatch_gradient(p, Vector::Ones(2), SampleBatch<Vector>{}, counter), InvalidConfig);
  SeededRng rng(1, 0);
  EXPECT_THROW(draw_batch(p, 0, rng), InvalidConfig);
}

TEST(QuadraticOracle, UnbiasedAtRandomPoints) {
  QuadraticSpec spec;
  spec.n = 8;
  spec.spectrum_set = {0.1, 1.0, 10.0};
  spec.seed = 3;
  const auto p = QuadraticProblem::generate(spec);
  SeededRng rng(21, 0);
  const int samples = 100000;
  for (int point = 0; point < 10; ++point) {
    const Vector x = testing_support::random_vector(spec.n, rng, 2.0);
    Vector sum = Vector::Zero(spec.n), sum_sq = Vector::Zero(spec.n);
    for (int i = 0; i < samples; ++i) {
      const Vector g = p.stochastic_gradient(x, p.draw_sample(rng));
      sum += g;
      sum_sq += g.cwiseProduct(g);
    }
    const Vector mean = sum / samples;
    const Vector sd = (sum_sq / samples - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt();
    const Vector exact = exact_gradient_quadratic(p, x);
    for (Index i = 0; i < spec.n; ++i) EXPECT_LE(std::abs(mean[i] - exact[i]), 4.0 * sd[i] / std::sqrt(samples) + 1e-12);
  }
}

TEST(QuadraticOracle, VarianceMatchesUniformLaw) {
  QuadraticSpec spec;
  spec.n = 10;
  spec.seed = 5;
  const auto p = QuadraticProblem::generate(spec);
  SeededRng rng(6, 0);
  const Vector x = testing_support::random_vector(spec.n, rng, 3.0);
  const Vector exact = p.exact_gradient(x);
  double acc = 0.0;
  const int samples = 50000;
  for (int i = 0; i < samples; ++i) acc += (p.stochastic_gradient(x, p.draw_sample(rng)) - exact).squaredNorm();
  EXPECT_NEAR(acc / samples, p.gradient_variance(x), 0.03 * p.gradient_variance(x));
}

TEST(QuadraticOracle, ExactGradientCases) {
  const QuadraticProblem one((Vector(1) << 2.0).finished(), (Vector(1) << 4.0).finished());
  EXPECT_DOUBLE_EQ(exact_gradient_quadratic(one, Vector::Zero(1))[0], -4.0);
  QuadraticSpec spec;
  spec.n = 30;
  const auto p = QuadraticProblem::generate(spec);
  EXPECT_LE(exact_gradient_quadratic(p, p.stationary_point()).norm(), 1e-14);
}

TEST(QuadraticOracle, ExactGradientMatchesMillionSampleAverage) {
  QuadraticSpec spec;
  spec.n = 3;
  spec.spectrum_set = {0.5, 2.0};
  const auto p = QuadraticProblem::generate(spec);
  SeededRng rng(2, 0);
  const Vector x = (Vector(3) << 1.0, -2.0, 0.5).finished();
  Vector sum = Vector::Zero(3);
  const int samples = 1000000;
  for (int i = 0; i < samples; ++i) sum += p.stochastic_gradient(x, p.draw_sample(rng));
  // Per-component sd is at most 0.1 * a_i |x_i| / sqrt(3).
  const Vector bound = (0.1 / std::sqrt(3.0)) * p.diag().cwiseProduct(x).cwiseAbs() * (5.0 / std::sqrt(samples));
  EXPECT_TRUE(((sum / samples - p.exact_gradient(x)).cwiseAbs().array() <= bound.array()).all());
}

TEST(QuadraticOracle, GeneratorDrawsFromTheSet) {
  QuadraticSpec spec;
  spec.n = 200;
  spec.spectrum_set = {0.1, 1.0, 10.0, 100.0};
  const auto p = QuadraticProblem::generate(spec);
  std::set<double> seen;
  for (Index i = 0; i < spec.n; ++i) {
    seen.insert(p.diag()[i]);
    EXPECT_GE(p.rhs()[i], 0.0);
    EXPECT_LT(p.rhs()[i], 1.0);
  }
  EXPECT_EQ(seen, std::set<double>(spec.spectrum_set.begin(), spec.spectrum_set.end()));
}

TEST(SameBatchGradient, NoStepReproducesMinibatchGradient) {
  const auto p = QuadraticProblem::generate(QuadraticSpec{});
  SeededRng rng(4, 0);
  const auto batch = draw_batch(p, 5, rng);
  OracleCounter counter;
  const Vector x = testing_support::random_vector(p.dim(), rng);
  const Vector g = minibatch_gradient(p, x, batch, counter);
  EXPECT_EQ(gradient_same_batch(p, x, batch, counter), g);
  EXPECT_EQ(counter.n_sfo, 10u);
}

TEST(SameBatchGradient, DifferenceMatchesClosedForm) {
  QuadraticSpec spec;
  spec.n = 40;
  const auto p = QuadraticProblem::generate(spec);
  SeededRng rng(12, 0);
  const auto batch = draw_batch(p, 5, rng);
  OracleCounter counter;
  const Vector x = testing_support::random_vector(spec.n, rng);
  const Vector x_next = testing_support::random_vector(spec.n, rng);
  const Vector g = minibatch_gradient(p, x, batch, counter);
  const std::uint64_t before = counter.n_sfo;
  const Vector g_bar = gradient_same_batch(p, x_next, batch, counter);
  EXPECT_EQ(counter.n_sfo - before, 5u);
  Vector xi_bar = Vector::Zero(spec.n);
  for (const auto& xi : batch.samples) xi_bar += xi;
  xi_bar /= 5.0;
  const Vector expected = (p.diag().array() * (1.0 + xi_bar.array()) * (x_next - x).array()).matrix();
  EXPECT_LE((g_bar - g - expected).norm(), 1e-12 * std::max(1.0, expected.norm()));
}

TEST(FiniteDifference, QuadraticPerSampleLoss) {
  QuadraticSpec spec;
  spec.n = 20;
  spec.spectrum_set = {0.1, 1.0, 10.0, 100.0};
  const auto p = QuadraticProblem::generate(spec);
  SeededRng rng(13, 0);
  for (int t = 0; t < 5; ++t) {
    const Vector x = testing_support::random_vector(spec.n, rng, 2.0);
    EXPECT_LE(finite_difference_check(p, x, p.draw_sample(rng), 1e-5), 1e-6);
  }
}

TEST(FiniteDifference, SvmPerSampleLoss) {
  const auto p = SigmoidSvmProblem::generate(small_svm_spec());
  SeededRng rng(14, 0);
  for (int t = 0; t < 10; ++t) {
    const Vector x = testing_support::random_vector(p.dim(), rng, 0.5);
    EXPECT_LE(finite_difference_check(p, x, p.draw_sample(rng), 1e-5), 1e-6);
  }
}

TEST(FiniteDifference, LinearIsExactForAnyStep) {
  SeededRng rng(15, 0);
  const LinearProblem p{testing_support::random_vector(6, rng)};
  const Vector x = testing_support::random_vector(6, rng);
  for (double h : {1e-3, 1.0, 10.0}) EXPECT_LE(finite_difference_check(p, x, 0, h), 1e-11);
}

TEST(SvmProblem, LabelsAgreeWithGroundTruth) {
  const auto p = SigmoidSvmProblem::generate(small_svm_spec());
  SeededRng rng(16, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto s = p.draw_sample(rng);
    EXPECT_GE(s.label * s.dot(p.ground_truth()), 0.0);
  }
  for (std::size_t i = 0; i < p.test_set().size(); ++i)
    ASSERT_GE(p.test_set().label(i) * p.test_set().dot(i, p.ground_truth()), 0.0);
}

TEST(SvmProblem, FeatureVectorsHaveDistinctSparseSupport) {
  SvmSpec spec = small_svm_spec();
  spec.n = 500;
  const auto p = SigmoidSvmProblem::generate(spec);
  EXPECT_EQ(p.nonzeros(), 25u);
  EXPECT_EQ(SigmoidSvmProblem::nonzeros_for(61, 0.05), 4u);
  SeededRng rng(17, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto s = p.draw_sample(rng);
    ASSERT_EQ(std::set<Index>(s.index.begin(), s.index.end()).size(), 25u);
    for (std::size_t j = 0; j < s.index.size(); ++j) {
      ASSERT_GE(s.index[j], 0);
      ASSERT_LT(s.index[j], 500);
      ASSERT_GE(s.value[j], 0.0);
      ASSERT_LE(s.value[j], 1.0);
    }
  }
}

TEST(SvmProblem, InitialPointIsScaledUniform) {
  const auto p = SigmoidSvmProblem::generate(small_svm_spec());
  EXPECT_GE(p.initial_point().minCoeff(), 0.0);
  EXPECT_LE(p.initial_point().maxCoeff(), 5.0);
  EXPECT_GE(p.ground_truth().minCoeff(), -1.0);
  EXPECT_LE(p.ground_truth().maxCoeff(), 1.0);
}

TEST(SvmProblem, MisclassificationOfTruthAndItsNegation) {
  const auto p = SigmoidSvmProblem::generate(small_svm_spec());
  EXPECT_DOUBLE_EQ(misclassification_error(p, p.ground_truth()), 0.0);
  EXPECT_DOUBLE_EQ(misclassification_error(p, -p.ground_truth()), 1.0);
  EXPECT_DOUBLE_EQ(misclassification_error(p, Vector::Zero(p.dim())), 1.0);  // sign(0) counts as wrong
}

TEST(SvmProblem, DefaultTestSetSize) {
  EXPECT_EQ(SvmSpec{}.test_size, 75000u);
  EXPECT_DOUBLE_EQ(SvmSpec{}.lambda, 0.01);
}

TEST(SvmProblem, EstimatedGradientAtOriginHasNoRegularizer) {
  const auto spec = small_svm_spec();
  const auto p = SigmoidSvmProblem::generate(spec);
  const Vector g = estimated_gradient_svm(p, Vector::Zero(p.dim()), 3000, 9);
  SeededRng rng(9, 3);
  Vector manual = Vector::Zero(p.dim());
  for (int i = 0; i < 3000; ++i) {
    const auto s = p.draw_sample(rng);
    for (std::size_t j = 0; j < s.index.size(); ++j) manual[s.index[j]] -= s.label * s.value[j];
  }
  manual /= 3000.0;
  EXPECT_LE((g - manual).norm(), 1e-12);
}

TEST(SvmProblem, EstimatedGradientIsDeterministicAndMatchesOwnEvalSet) {
  const auto spec = small_svm_spec();
  const auto p = SigmoidSvmProblem::generate(spec);
  SeededRng rng(18, 0);
  const Vector x = testing_support::random_vector(p.dim(), rng);
  EXPECT_EQ(estimated_gradient_svm(p, x, 500, 77), estimated_gradient_svm(p, x, 500, 77));
  EXPECT_EQ(estimated_gradient_svm(p, x, spec.eval_size, spec.eval_seed), p.full_gradient(x));
}

TEST(SvmProblem, LargeAndSmallEvaluationSetsAgree) {
  auto spec = small_svm_spec();
  spec.n = 40;
  const auto p = SigmoidSvmProblem::generate(spec);
  SeededRng rng(19, 0);
  const Vector x = testing_support::random_vector(p.dim(), rng, 0.3);
  const std::size_t small = 10000;
  // Standard error of the small-set mean, from its per-sample gradient spread.
  SeededRng draw(31, 3);
  const auto set = p.draw_set(small, draw);
  const Vector mean = p.set_gradient(set, x);
  double spread = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    Vector gi = 2.0 * spec.lambda * x;
    const double v = set.label(i);
    const double t = std::tanh(v * set.dot(i, x));
    set.axpy(i, -v * (1.0 - t * t), gi);
    spread += (gi - mean).squaredNorm();
  }
  const double se = std::sqrt(spread / static_cast<double>(small - 1) / static_cast<double>(small));
  const double big_norm = estimated_gradient_svm(p, x, 1000000, 32).norm();
  EXPECT_LE(std::abs(big_norm - mean.norm()), 3.0 * se);
}

TEST(SvmProblem, GradientMatchesObjectiveDifferences) {
  auto spec = small_svm_spec();
  spec.n = 30;
  const auto p = SigmoidSvmProblem::generate(spec);
  SeededRng rng(20, 0);
  const Vector x = testing_support::random_vector(p.dim(), rng, 0.5);
  const Vector g = p.full_gradient(x);
  const double h = 1e-6;
  for (Index i = 0; i < 5; ++i) {
    Vector up = x, down = x;
    up[i] += h;
    down[i] -= h;
    EXPECT_NEAR(g[i], (p.objective_estimate(up) - p.objective_estimate(down)) / (2.0 * h), 1e-7);
  }
}

TEST(ProblemIo, RoundTripRegeneratesBitExactly) {
  const auto dir = std::filesystem::temp_directory_path() / "sqnlab_problem_io";
  std::filesystem::create_directories(dir);
  QuadraticSpec q;
  q.n = 50;
  q.spectrum_set = {0.1, 1.0, 10.0};
  q.seed = 99;
  save_problem_spec(q, (dir / "q.json").string());
  const auto q2 = std::get<QuadraticSpec>(load_problem_spec((dir / "q.json").string()));
  const auto a = QuadraticProblem::generate(q), b = QuadraticProblem::generate(q2);
  EXPECT_EQ(a.diag(), b.diag());
  EXPECT_EQ(a.rhs(), b.rhs());

  SvmSpec s = small_svm_spec();
  s.lambda = 0.1 + 0.2;  // not exactly representable in short decimal
  save_problem_spec(s, (dir / "s.json").string());
  const auto s2 = std::get<SvmSpec>(load_problem_spec((dir / "s.json").string()));
  EXPECT_EQ(s2.lambda, s.lambda);
  const auto c = SigmoidSvmProblem::generate(s), d = SigmoidSvmProblem::generate(s2);
  EXPECT_EQ(c.ground_truth(), d.ground_truth());
  EXPECT_EQ(c.initial_point(), d.initial_point());
  EXPECT_EQ(c.misclassification_error(c.initial_point()), d.misclassification_error(d.initial_point()));
}

TEST(ProblemIo, UnknownKeysAndBadTypesAreErrors) {
  EXPECT_THROW(problem_spec_from_json(Json::parse(R"({"type":"quadratic","n":5,"colour":1})")), InvalidConfig);
  EXPECT_THROW(problem_spec_from_json(Json::parse(R"({"type":"cubic"})")), InvalidConfig);
  EXPECT_THROW(problem_spec_from_json(Json::parse(R"({"type":"svm","n":"many"})")), InvalidConfig);
  EXPECT_THROW(problem_spec_from_json(Json::parse(R"({"type":"quadratic","spectrum_set":[]})")), InvalidConfig);
}
