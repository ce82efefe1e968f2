#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sqnlab/core/linalg.hpp"
#include "sqnlab/core/rng.hpp"
#include "test_support.hpp"

using namespace sqnlab;

TEST(SpdSolve, IdentityReturnsRightHandSide) {
  SeededRng rng(3, 0);
  for (Index n : {1, 4, 17}) {
    const Vector g = testing_support::random_vector(n, rng);
    EXPECT_EQ(spd_solve(SpdMatrix::identity(n), g), g);
  }
}

TEST(SpdSolve, DiagonalInversion) {
  Matrix b = Matrix::Zero(2, 2);
  b(0, 0) = 2.0;
  b(1, 1) = 4.0;
  const Vector d = spd_solve(SpdMatrix(b), (Vector(2) << 2.0, 4.0).finished());
  EXPECT_DOUBLE_EQ(d[0], 1.0);
  EXPECT_DOUBLE_EQ(d[1], 1.0);
}

TEST(SpdSolve, MatchesExtendedPrecisionElimination) {
  SeededRng rng(11, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix b = testing_support::random_spd(5, rng, 0.1);
    const Vector g = testing_support::random_vector(5, rng);
    const Vector d = spd_solve(SpdMatrix(b), g);
    const Vector ref = testing_support::solve_long_double(b, g);
    EXPECT_LE((d - ref).norm(), 1e-10 * std::max(1.0, ref.norm()));
    EXPECT_LE((b * d - g).norm(), 1e-10 * std::max(1.0, g.norm()));
  }
}

TEST(SpdSolve, IndefiniteMatrixThrows) {
  Matrix b = Matrix::Identity(3, 3);
  b(1, 1) = -1.0;
  EXPECT_THROW(spd_solve(SpdMatrix(b), Vector::Ones(3)), FactorizationFailed);
  EXPECT_FALSE(SpdMatrix(b).is_positive_definite());
}

TEST(SpdSolve, DimensionMismatchThrows) {
  EXPECT_THROW(spd_solve(SpdMatrix::identity(3), Vector::Ones(2)), DimensionMismatch);
}

TEST(SpdMatrix, ConstructionSymmetrizes) {
  Matrix m(2, 2);
  m << 2.0, 1.0, 0.0, 3.0;
  const SpdMatrix s(m);
  EXPECT_DOUBLE_EQ(s.matrix()(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(s.matrix()(1, 0), 0.5);
}

TEST(MinEigenvalue, Diagonal) {
  Matrix b = Matrix::Zero(3, 3);
  b.diagonal() << 3.0, 1.0, 2.0;
  EXPECT_NEAR(min_eigenvalue(b), 1.0, 1e-12);
  EXPECT_NEAR(min_eigenvalue(SpdMatrix::identity(6)), 1.0, 1e-12);
}

TEST(MinEigenvalue, ConstructedFromKnownSpectrum) {
  SeededRng rng(5, 0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector spectrum(4);
    for (Index i = 0; i < 4; ++i) spectrum[i] = rng.uniform(0.01, 10.0);
    const Matrix q = testing_support::random_orthogonal(4, rng);
    const Matrix b = q * spectrum.asDiagonal() * q.transpose();
    EXPECT_NEAR(min_eigenvalue(SpdMatrix(b)), spectrum.minCoeff(), 1e-9);
  }
}

TEST(ApplyInversePlusShift, ScaledIdentityCases) {
  const Vector g = (Vector(2) << 4.0, 0.0).finished();
  EXPECT_EQ(apply_inverse_plus_shift(ScaledIdentity{1.0}, 0.0, g), g);
  const Vector out = apply_inverse_plus_shift(ScaledIdentity{0.5}, 0.25, g);
  EXPECT_DOUBLE_EQ(out[0], 3.0);
  EXPECT_DOUBLE_EQ(out[1], 0.0);
}

TEST(ApplyInversePlusShift, DenseDiagonalPlusShift) {
  Matrix b = Matrix::Zero(2, 2);
  b.diagonal() << 2.0, 4.0;
  const Vector out = apply_inverse_plus_shift(SpdMatrix(b), 1.0, (Vector(2) << 2.0, 4.0).finished());
  EXPECT_DOUBLE_EQ(out[0], 3.0);
  EXPECT_DOUBLE_EQ(out[1], 5.0);
}

TEST(ApplyInversePlusShift, LinearInGradient) {
  SeededRng rng(8, 0);
  const SpdMatrix b(testing_support::random_spd(6, rng, 0.5));
  const CurvatureApprox approx = b;
  for (int trial = 0; trial < 20; ++trial) {
    const Vector g1 = testing_support::random_vector(6, rng);
    const Vector g2 = testing_support::random_vector(6, rng);
    const double a = rng.uniform(-3.0, 3.0);
    const double c = rng.uniform(-3.0, 3.0);
    const Vector lhs = apply_inverse_plus_shift(approx, 0.3, a * g1 + c * g2);
    const Vector rhs = a * apply_inverse_plus_shift(approx, 0.3, g1) + c * apply_inverse_plus_shift(approx, 0.3, g2);
    EXPECT_LE((lhs - rhs).norm(), 1e-12 * std::max(1.0, lhs.norm()));
  }
}

TEST(ApplyInversePlusShift, RejectsNegativeShiftAndNonpositiveLambda) {
  EXPECT_THROW(apply_inverse_plus_shift(ScaledIdentity{1.0}, -0.1, Vector::Ones(2)), InvalidConfig);
  EXPECT_THROW(apply_inverse_plus_shift(ScaledIdentity{0.0}, 0.0, Vector::Ones(2)), InvalidConfig);
}

TEST(SeededRng, EqualSeedAndStreamGiveEqualDraws) {
  SeededRng a(42, 3), b(42, 3);
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(a(), b());
  SeededRng c(42, 3), d(42, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(c.uniform(-1.0, 1.0), d.uniform(-1.0, 1.0));
}

TEST(SeededRng, DistinctStreamsAndSeedsDiffer) {
  SeededRng a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a(), y = b(), z = c();
    same_ab += x == y;
    same_ac += x == z;
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(SeededRng, UniformMomentsAndIndexRange) {
  SeededRng rng(9, 0);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(-1.0, 1.0);
    ASSERT_GE(u, -1.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.0, 4.0 * std::sqrt(1.0 / 3.0 / n));
  EXPECT_NEAR(sum_sq / n, 1.0 / 3.0, 0.005);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.index(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(DeriveSeed, PureFunctionOfInputs) {
  EXPECT_EQ(derive_seed(1, "run:SGD", 3), derive_seed(1, "run:SGD", 3));
  EXPECT_NE(derive_seed(1, "run:SGD", 3), derive_seed(1, "run:SGD", 4));
  EXPECT_NE(derive_seed(1, "run:SGD", 3), derive_seed(1, "run:SCBB", 3));
  EXPECT_NE(derive_seed(1, "run:SGD", 3), derive_seed(2, "run:SGD", 3));
}
