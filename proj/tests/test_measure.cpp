#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "lrr/measure.hpp"
#include "lrr/random.hpp"

using namespace lrr;

namespace {

Matrix diag31()
{
  Matrix M = Matrix::Zero(2, 2);
  M(0, 0) = 3;
  M(1, 1) = 1;
  return M;
}

std::vector<MeasurementEnsemble> all_kinds(Index n1, Index n2, std::uint64_t seed)
{
  return {MeasurementEnsemble::gaussian(n1, n2, 17, seed), MeasurementEnsemble::rademacher(n1, n2, 17, seed),
          MeasurementEnsemble::entry_sampling(sample_omega(n1, n2, 11, seed)),
          MeasurementEnsemble::vectorization(n1, n2)};
}

} // namespace

TEST(Apply, VectorizationIsRowMajor)
{
  const Vector y = MeasurementEnsemble::vectorization(2, 2).apply(diag31());
  ASSERT_EQ(y.size(), 4);
  EXPECT_EQ(y(0), 3.0);
  EXPECT_EQ(y(1), 0.0);
  EXPECT_EQ(y(2), 0.0);
  EXPECT_EQ(y(3), 1.0);
  Matrix R(2, 3);
  R << 1, 2, 3, 4, 5, 6;
  const Vector z = MeasurementEnsemble::vectorization(2, 3).apply(R);
  for (Index k = 0; k < 6; ++k)
    EXPECT_EQ(z(k), static_cast<double>(k + 1));
}

TEST(Apply, EntrySamplingSingleEntry)
{
  const auto A = MeasurementEnsemble::entry_sampling(ObservationSet(2, 2, {{0, 0}}));
  const Vector y = A.apply(diag31());
  ASSERT_EQ(y.size(), 1);
  EXPECT_EQ(y(0), 3.0);
}

TEST(Apply, DimensionMismatchThrows)
{
  for (const auto& A : all_kinds(3, 4, 1)) {
    EXPECT_THROW(A.apply(Matrix::Zero(4, 3)), std::invalid_argument);
    EXPECT_THROW(A.adjoint(Vector::Zero(A.size() + 1)), std::invalid_argument);
  }
}

TEST(Apply, GaussianIsotropyInMean)
{
  Matrix X = Matrix::Zero(20, 20);
  X(3, 7) = 0.6;
  X(11, 2) = 0.8;
  double sum = 0.0, sumsq = 0.0;
  const int seeds = 500;
  for (int s = 0; s < seeds; ++s) {
    const double q = MeasurementEnsemble::gaussian(20, 20, 400, derive_seed(5, {std::uint64_t(s)})).apply(X).squaredNorm();
    sum += q;
    sumsq += q * q;
  }
  const double mean = sum / seeds;
  const double se = std::sqrt((sumsq / seeds - mean * mean) / seeds);
  EXPECT_GE(mean, 0.95);
  EXPECT_LE(mean, 1.05);
  EXPECT_LE(std::abs(mean - 1.0), 3.0 * se);
}

TEST(Apply, EnsembleEntryScales)
{
  const auto G = MeasurementEnsemble::gaussian(10, 10, 300, 3);
  double ss = 0.0;
  for (Index k = 0; k < G.size(); ++k)
    ss += G.sensing_matrix(k).squaredNorm();
  // average entry variance 1/m
  EXPECT_NEAR(ss / (300.0 * 100.0), 1.0 / 300.0, 0.05 / 300.0);
  const auto R = MeasurementEnsemble::rademacher(4, 5, 30, 3);
  for (Index k = 0; k < R.size(); ++k)
    EXPECT_LE((R.sensing_matrix(k).cwiseAbs().array() - 1.0 / std::sqrt(30.0)).abs().maxCoeff(), 1e-15);
}

TEST(Adjoint, IdentityAgainstApplyForEveryKind)
{
  for (const auto& A : all_kinds(3, 5, 9)) {
    for (std::uint64_t k = 0; k < 100; ++k) {
      Rng rng(derive_seed(k, {static_cast<std::uint64_t>(A.kind())}));
      Matrix X(3, 5);
      for (Index i = 0; i < X.size(); ++i)
        X.data()[i] = rng.normal();
      Vector v(A.size());
      for (Index i = 0; i < v.size(); ++i)
        v(i) = rng.normal();
      const double lhs = A.apply(X).dot(v);
      const double rhs = (X.array() * A.adjoint(v).array()).sum();
      EXPECT_LE(std::abs(lhs - rhs), 1e-9 * std::max(1.0, std::abs(lhs))) << to_string(A.kind());
    }
  }
}

TEST(Adjoint, SmallGaussianExact)
{
  const auto A = MeasurementEnsemble::gaussian(3, 3, 5, 123);
  for (std::uint64_t k = 0; k < 100; ++k) {
    Rng rng(k);
    Matrix X(3, 3);
    for (Index i = 0; i < 9; ++i)
      X.data()[i] = rng.normal();
    Vector v(5);
    for (Index i = 0; i < 5; ++i)
      v(i) = rng.normal();
    // independent evaluation through the explicit sensing matrices
    double lhs = 0.0;
    Matrix adj = Matrix::Zero(3, 3);
    for (Index i = 0; i < 5; ++i) {
      lhs += v(i) * (A.sensing_matrix(i).array() * X.array()).sum();
      adj += v(i) * A.sensing_matrix(i);
    }
    EXPECT_NEAR(lhs, A.apply(X).dot(v), 1e-12);
    EXPECT_LE((adj - A.adjoint(v)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Adjoint, CompositionsForImplicitKinds)
{
  Rng rng(4);
  Matrix X(6, 4);
  for (Index i = 0; i < X.size(); ++i)
    X.data()[i] = rng.normal();
  const auto V = MeasurementEnsemble::vectorization(6, 4);
  EXPECT_EQ(V.adjoint(V.apply(X)), X);
  const ObservationSet omega = sample_omega(6, 4, 10, 2);
  const auto E = MeasurementEnsemble::entry_sampling(omega);
  EXPECT_EQ(E.adjoint(E.apply(X)), project_omega(omega, X));
  EXPECT_EQ(V.lipschitz_estimate(), 1.0);
  EXPECT_EQ(E.lipschitz_estimate(), 1.0);
}

TEST(Adjoint, BasisResponseMatchesApply)
{
  for (const auto& A : all_kinds(3, 4, 2))
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 4; ++j) {
        Matrix E = Matrix::Zero(3, 4);
        E(i, j) = 1.0;
        EXPECT_EQ(A.basis_response(i, j), A.apply(E));
      }
}

TEST(Adjoint, LipschitzEstimateBoundsOperatorNorm)
{
  const auto A = MeasurementEnsemble::gaussian(6, 6, 40, 8);
  Matrix S(40, 36);
  for (Index k = 0; k < 40; ++k) {
    const Matrix Ak = A.sensing_matrix(k);
    S.row(k) = Eigen::Map<const Vector>(Ak.data(), 36).transpose();
  }
  const double top = Eigen::JacobiSVD<Matrix>(S).singularValues()(0);
  EXPECT_GE(A.lipschitz_estimate(), top * top);
  EXPECT_LE(A.lipschitz_estimate(), 1.1 * top * top);
}

TEST(SampleOmega, FullAndSingleton)
{
  const ObservationSet all = sample_omega(3, 4, 12, 0);
  EXPECT_EQ(all.size(), 12);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 4; ++j)
      EXPECT_TRUE(all.contains(i, j));
  const ObservationSet a = sample_omega(10, 10, 1, 1);
  const ObservationSet b = sample_omega(10, 10, 1, 2);
  EXPECT_EQ(a.size(), 1);
  EXPECT_EQ(b.size(), 1);
  EXPECT_EQ(a, sample_omega(10, 10, 1, 1));
  EXPECT_THROW(sample_omega(3, 3, 0, 0), std::invalid_argument);
  EXPECT_THROW(sample_omega(3, 3, 10, 0), std::invalid_argument);
}

TEST(SampleOmega, RowCountsWithinBinomialTail)
{
  // Row counts are hypergeometric with mean 15 and variance below 15; the
  // bound 15 + 6 sqrt(15) is a six-sigma tail, so 200 seeds should never hit it.
  for (std::uint64_t s = 0; s < 200; ++s) {
    const ObservationSet om = sample_omega(30, 30, 450, s);
    const auto deg = om.row_degrees();
    double mean = 0.0;
    for (Index d : deg)
      mean += static_cast<double>(d);
    EXPECT_DOUBLE_EQ(mean / 30.0, 15.0);
    EXPECT_LE(static_cast<double>(*std::max_element(deg.begin(), deg.end())), 15.0 + 6.0 * std::sqrt(15.0));
  }
}

TEST(SampleOmega, UniformMarginals)
{
  // Each cell of a 4 x 4 grid is included with probability m / 16 = 1/4.
  std::vector<int> hits(16, 0);
  const int seeds = 4000;
  for (int s = 0; s < seeds; ++s) {
    const ObservationSet om = sample_omega(4, 4, 4, derive_seed(77, {std::uint64_t(s)}));
    for (const auto& [i, j] : om.pairs())
      ++hits[static_cast<std::size_t>(i * 4 + j)];
  }
  const double p = 0.25, sd = std::sqrt(seeds * p * (1 - p));
  for (int h : hits)
    EXPECT_LE(std::abs(h - seeds * p), 5.0 * sd);
}

TEST(ObservationSetType, ValidatesAndSorts)
{
  const ObservationSet om(3, 3, {{2, 1}, {0, 2}, {0, 0}});
  ASSERT_EQ(om.size(), 3);
  EXPECT_EQ(om.pairs()[0], (ObservationSet::Entry{0, 0}));
  EXPECT_EQ(om.pairs()[1], (ObservationSet::Entry{0, 2}));
  EXPECT_DOUBLE_EQ(om.fraction(), 3.0 / 9.0);
  EXPECT_THROW(ObservationSet(3, 3, {{0, 0}, {0, 0}}), std::invalid_argument);
  EXPECT_THROW(ObservationSet(3, 3, {{3, 0}}), std::invalid_argument);
}

TEST(ProjectOmega, Cases)
{
  Rng rng(3);
  Matrix X(4, 4), Y(4, 4);
  for (Index i = 0; i < 16; ++i) {
    X.data()[i] = rng.normal();
    Y.data()[i] = rng.normal();
  }
  EXPECT_EQ(project_omega(sample_omega(4, 4, 16, 0), X), X);
  EXPECT_EQ(project_omega(ObservationSet(4, 4, {}), X), Matrix::Zero(4, 4));
  const ObservationSet om = sample_omega(4, 4, 7, 5);
  const Matrix P = project_omega(om, X);
  EXPECT_EQ(project_omega(om, P), P);
  EXPECT_NEAR((P.array() * Y.array()).sum(), (X.array() * project_omega(om, Y).array()).sum(), 1e-14);
  EXPECT_THROW(project_omega(om, Matrix::Zero(3, 4)), std::invalid_argument);
}

TEST(Noise, Cases)
{
  const Vector y = Vector::LinSpaced(5, 0, 4);
  EXPECT_EQ(add_noise(y, {0.0, 9}), y);
  EXPECT_EQ(add_noise(y, {0.3, 9}), add_noise(y, {0.3, 9}));
  EXPECT_NE(add_noise(y, {0.3, 9}), add_noise(y, {0.3, 10}));
  const Vector z = add_noise(Vector::Zero(10000), {1.0, 11});
  const double mean = z.mean();
  const double var = (z.array() - mean).square().sum() / (z.size() - 1);
  EXPECT_GE(var, 0.95);
  EXPECT_LE(var, 1.05);
  EXPECT_THROW(add_noise(y, {-1.0, 0}), std::invalid_argument);
}

TEST(Problem, FromTruthAndValidation)
{
  Matrix M = Matrix::Identity(3, 3);
  const auto p = RecoveryProblem::from_truth(MeasurementEnsemble::vectorization(3, 3), M, {0.0, 0});
  EXPECT_EQ(p.y, MeasurementEnsemble::vectorization(3, 3).apply(M));
  EXPECT_NO_THROW(p.validate());
  EXPECT_THROW(RecoveryProblem::from_truth(MeasurementEnsemble::vectorization(2, 3), M, {0.0, 0}), std::invalid_argument);
}

TEST(Formats, OmegaRoundTripAndErrors)
{
  const ObservationSet om = sample_omega(5, 6, 9, 4);
  std::stringstream ss;
  write_omega(ss, om);
  EXPECT_EQ(ss.str().rfind("omega 5 6 9\n", 0), 0u);
  EXPECT_EQ(read_omega(ss), om);
  std::stringstream short_list("omega 2 2 3\n0 0\n1 1\n");
  EXPECT_THROW(read_omega(short_list), std::runtime_error);
  std::stringstream dup("omega 2 2 2\n0 0\n0 0\n");
  EXPECT_ANY_THROW(read_omega(dup));
}

TEST(Formats, VectorRoundTrip)
{
  const Vector v = add_noise(Vector::Zero(7), {1.0, 3});
  std::stringstream ss;
  write_vector(ss, v);
  EXPECT_EQ(read_vector(ss), v);
}

TEST(Kinds, ParseAndPrint)
{
  for (auto k : {EnsembleKind::gaussian, EnsembleKind::rademacher, EnsembleKind::entry_sampling, EnsembleKind::vectorization})
    EXPECT_EQ(parse_ensemble_kind(to_string(k)), k);
  EXPECT_EQ(parse_ensemble_kind("entry"), EnsembleKind::entry_sampling);
  EXPECT_THROW(parse_ensemble_kind("fourier"), std::invalid_argument);
}
