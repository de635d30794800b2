#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lrr/oracle.hpp"
#include "lrr/random.hpp"
#include "oracles.hpp"

using namespace lrr;

namespace {

oracle::DenseOperator dense_copy(const MeasurementEnsemble& A)
{
  oracle::DenseOperator D{A.rows(), A.cols(), Matrix(A.size(), A.rows() * A.cols())};
  for (Index k = 0; k < A.size(); ++k) {
    const Matrix Ak = A.sensing_matrix(k);
    D.rows.row(k) = Eigen::Map<const Vector>(Ak.data(), Ak.size()).transpose();
  }
  return D;
}

std::vector<double> random_spectrum(Rng& rng)
{
  const auto k = static_cast<std::size_t>(1 + rng.below(12));
  std::vector<double> s(k);
  for (auto& v : s)
    v = std::exp(3.0 * rng.normal());
  std::sort(s.rbegin(), s.rend());
  return s;
}

double direct_min_sum(const std::vector<double>& s, double n, double sigma)
{
  double acc = 0.0;
  for (double v : s)
    acc += std::min(v * v, n * sigma * sigma);
  return acc;
}

} // namespace

TEST(OracleFit, IdentityColumnSpaceInterpolates)
{
  const auto A = MeasurementEnsemble::vectorization(5, 4);
  const Vector y = A.apply(gaussian_matrix(5, 4, 1));
  const OracleFit fit = oracle_fit(Matrix::Identity(5, 5), A, y);
  EXPECT_LE((A.apply(fit.estimate) - y).norm(), 1e-12);
  EXPECT_FALSE(fit.rank_deficient);
}

TEST(OracleFit, VectorizationProjectsOntoColumnSpace)
{
  const Matrix M = gen_low_rank({8, 8, 4, GeometricSpectrum{1.0, 0.5}, RandomOrthogonalModel{}, 2}).matrix;
  const SvdFactors f = svd(M);
  const Matrix U = f.U.leftCols(2);
  const auto A = MeasurementEnsemble::vectorization(8, 8);
  const OracleFit fit = oracle_fit(U, A, A.apply(M));
  EXPECT_LE((fit.estimate - U * U.transpose() * M).norm(), 1e-12);
  EXPECT_LE((fit.estimate - project_rank(M, 2)).norm(), 1e-10);
}

TEST(OracleFit, MatchesNormalEquations)
{
  const Index n = 6, r = 2, m = 30;
  const auto A = MeasurementEnsemble::gaussian(n, n, m, 3);
  const Matrix U = orthonormalize(gaussian_matrix(n, r, 4));
  const Vector y = add_noise(A.apply(gen_low_rank({n, n, r, EqualSpectrum{1.0}, RandomOrthogonalModel{}, 5}).matrix),
                             {0.1, 6});
  // restricted design built from the dense sensing rows: column (a, b) is vec(u_a e_b^T)
  const auto D = dense_copy(A);
  Matrix B(m, r * n);
  for (Index b = 0; b < n; ++b)
    for (Index a = 0; a < r; ++a) {
      Matrix E = Matrix::Zero(n, n);
      E.col(b) = U.col(a);
      B.col(b * r + a) = D.apply(E);
    }
  const Vector coef = oracle::normal_equations(B, y);
  const Matrix ref = U * Eigen::Map<const Matrix>(coef.data(), r, n);
  const OracleFit fit = oracle_fit(U, A, y);
  const double obj = (y - A.apply(fit.estimate)).squaredNorm();
  const double obj_ref = (y - D.apply(ref)).squaredNorm();
  EXPECT_NEAR(obj, obj_ref, 1e-9);
  EXPECT_LE((fit.estimate - ref).norm(), 1e-8);
}

TEST(OracleFit, ResidualIsOrthogonalToRestrictedRange)
{
  const auto A = MeasurementEnsemble::rademacher(7, 7, 40, 8);
  const Matrix U = orthonormalize(gaussian_matrix(7, 2, 9));
  const Vector y = add_noise(Vector::Zero(40), {1.0, 10});
  const OracleFit fit = oracle_fit(U, A, y);
  const Vector res = y - A.apply(fit.estimate);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Matrix R = gaussian_matrix(2, 7, derive_seed(k, {11}));
    EXPECT_NEAR(res.dot(A.apply(U * R)), 0.0, 1e-9);
  }
}

TEST(OracleFit, RankDeficientIsFlagged)
{
  const auto A = MeasurementEnsemble::gaussian(6, 6, 5, 1); // 5 rows for 12 unknowns
  const Matrix U = orthonormalize(gaussian_matrix(6, 2, 2));
  const OracleFit fit = oracle_fit(U, A, add_noise(Vector::Zero(5), {1.0, 3}));
  EXPECT_TRUE(fit.rank_deficient);
  EXPECT_THROW(oracle_fit(Matrix::Ones(6, 2), A, Vector::Zero(5)), std::invalid_argument);
}

TEST(IdealRisk, Examples)
{
  EXPECT_EQ(ideal_risk({3.0, 1.0, 0.1}, 100, 0.0), 0.0);
  EXPECT_NEAR(ideal_risk({3.0, 1.0, 0.1}, 100, 0.05), 0.255, 1e-12);
  EXPECT_NEAR(ideal_risk({5.0, 4.0, 3.0}, 10, 0.1), 0.5 * 3 * 10 * 0.01, 1e-14);
}

TEST(IdealRisk, SandwichOnRandomSpectra)
{
  Rng rng(2024);
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto s = random_spectrum(rng);
    const auto n = static_cast<Index>(1 + rng.below(200));
    const double sigma = std::exp(2.0 * rng.normal());
    const double lower = direct_min_sum(s, static_cast<double>(n), sigma);
    double scan = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r <= s.size(); ++r) {
      double tail = 0.0;
      for (std::size_t i = r; i < s.size(); ++i)
        tail += s[i] * s[i];
      scan = std::min(scan, tail + static_cast<double>(r * n) * sigma * sigma);
    }
    double energy = 0.0;
    for (double v : s)
      energy += v * v;
    const double tol = 1e-12 * (energy + lower + scan);
    violations += !(lower <= scan + tol && scan <= 2 * lower + tol);
    EXPECT_NEAR(oracle_scan(s, n, sigma), scan, tol);
    EXPECT_NEAR(2.0 * ideal_risk(s, n, sigma), lower, 1e-12 * std::max(1.0, lower));
  }
  EXPECT_EQ(violations, 0);
}

TEST(Minimax, Examples)
{
  EXPECT_DOUBLE_EQ(minimax_bound(10, 1, 1.0, 0.0).value, 10.0);
  EXPECT_EQ(minimax_bound(10, 1, 0.0, 0.3).value, 0.0);
  EXPECT_NEAR(minimax_bound(40, 2, 0.1, 0.2).value, 0.6667, 5e-5);
  EXPECT_FALSE(minimax_bound(10, 1, 1.0, 0.0).up_to_constants);
  EXPECT_THROW(minimax_bound(10, 1, 1.0, 1.0), std::invalid_argument);
}

TEST(InstanceOptimal, Examples)
{
  const std::vector<double> big{10.0, 9.0, 8.0};
  EXPECT_NEAR(instance_optimal_bound(big, 50, 0.01, 3).value, 3 * 50 * 1e-4, 1e-15);
  EXPECT_NEAR(instance_optimal_bound({3.0, 2.0, 1.0}, 50, 0.0, 1).value, 5.0, 1e-14);

  std::vector<double> geo(20);
  for (std::size_t i = 0; i < geo.size(); ++i)
    geo[i] = std::pow(0.8, static_cast<double>(i));
  double expected = 0.0;
  for (std::size_t i = 0; i < geo.size(); ++i)
    expected += i < 5 ? std::min(geo[i] * geo[i], 50 * 1e-4) : geo[i] * geo[i];
  const BoundReport rep = instance_optimal_bound(geo, 50, 0.01, 5);
  EXPECT_NEAR(rep.value, expected, 1e-14);
  EXPECT_TRUE(rep.up_to_constants);
  EXPECT_THROW(instance_optimal_bound(geo, 50, 0.01, 0), std::invalid_argument);
  EXPECT_THROW(instance_optimal_bound(geo, 50, 0.01, 21), std::invalid_argument);
}

TEST(Stability, Examples)
{
  EXPECT_EQ(completion_stability_bound(50, 0.5, 0.0).value, 0.0);
  EXPECT_NEAR(completion_stability_bound(1, 1.0, 1.0).value, 4 * std::sqrt(3.0) + 2, 1e-13);
  EXPECT_NEAR(completion_stability_bound(1, 1.0, 1.0).value, 8.928, 5e-4);
  EXPECT_NEAR(completion_stability_bound(50, 0.5, 0.1).value, 6.525, 5e-4);
  EXPECT_THROW(completion_stability_bound(50, 0.0, 0.1), std::invalid_argument);
}

TEST(OptspaceBound, Examples)
{
  EXPECT_NEAR(optspace_noisy_bound(30, 900, 1, 1.0, 0.37).value, 0.37, 1e-15);
  const double a = optspace_noisy_bound(40, 500, 2, 1.5, 0.1).value;
  EXPECT_NEAR(optspace_noisy_bound(40, 500, 2, 3.0, 0.1).value, 4 * a, 1e-12 * a);
  const double helper = gaussian_noise_opnorm(50, 1250, 1e-3);
  EXPECT_NEAR(helper, std::sqrt(1250 * std::log(50.0) / 50) * 1e-3, 1e-15);
  EXPECT_NEAR(optspace_noisy_bound(50, 1250, 2, 1.0, helper).value, 2500.0 * std::sqrt(2.0) / 1250 * helper, 1e-15);
}

TEST(OptspaceBound, GaussianHelperAgreesWithEmpiricalNorm)
{
  const double helper = gaussian_noise_opnorm(50, 1250, 1e-3);
  std::vector<double> emp;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const ObservationSet om = sample_omega(50, 50, 1250, derive_seed(s, {1}));
    const auto A = MeasurementEnsemble::entry_sampling(om);
    emp.push_back(operator_norm(A.adjoint(add_noise(Vector::Zero(1250), {1e-3, derive_seed(s, {2})}))));
  }
  std::nth_element(emp.begin(), emp.begin() + 25, emp.end());
  RecordProperty("median_empirical", std::to_string(emp[25]));
  RecordProperty("helper", std::to_string(helper));
  EXPECT_GE(emp[25], 0.5 * helper);
  EXPECT_LE(emp[25], 2.0 * helper);
}

TEST(Bounds, MonotoneInNoiseAndDimension)
{
  const std::vector<double> s{2.0, 1.0, 0.5, 0.1};
  for (double sig = 0.01; sig < 1.0; sig *= 1.7) {
    const double next = sig * 1.7;
    EXPECT_LE(ideal_risk(s, 30, sig), ideal_risk(s, 30, next));
    EXPECT_LE(minimax_bound(30, 2, sig, 0.1).value, minimax_bound(30, 2, next, 0.1).value);
    EXPECT_LE(instance_optimal_bound(s, 30, sig, 2).value, instance_optimal_bound(s, 30, next, 2).value);
    EXPECT_LE(completion_stability_bound(30, 0.4, sig).value, completion_stability_bound(30, 0.4, next).value);
    EXPECT_LE(optspace_noisy_bound(30, 300, 2, 2.0, sig).value, optspace_noisy_bound(30, 300, 2, 2.0, next).value);
  }
  for (Index n = 5; n < 200; n *= 2) {
    EXPECT_LE(ideal_risk(s, n, 0.1), ideal_risk(s, 2 * n, 0.1));
    EXPECT_LE(minimax_bound(n, 2, 0.1, 0.1).value, minimax_bound(2 * n, 2, 0.1, 0.1).value);
    EXPECT_LE(completion_stability_bound(n, 0.4, 0.1).value, completion_stability_bound(2 * n, 0.4, 0.1).value);
    EXPECT_LE(optspace_noisy_bound(n, 300, 2, 2.0, 0.1).value, optspace_noisy_bound(2 * n, 300, 2, 2.0, 0.1).value);
  }
}

TEST(Bounds, RbarHeuristic)
{
  EXPECT_EQ(rbar_heuristic(50, 100), 1);
  EXPECT_EQ(rbar_heuristic(50, 1000), 2);
  EXPECT_EQ(rbar_heuristic(50, 1000, 0.5), 10);
}
