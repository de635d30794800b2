#pragma once
//
// Dense matrix core: SVD with a reproducible sign convention, nuclear norm,
// singular-value soft-thresholding, rank-r projection, random low-rank
// generators and the "lrm-v1" text format.
//

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace lrr {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A singular value counts toward rank iff sigma_i > kRankTolerance * sigma_1.
inline constexpr double kRankTolerance = 1e-9;

struct SvdFactors {
  Matrix U;     // n1 x k, orthonormal columns
  Vector sigma; // length k, nonincreasing, nonnegative
  Matrix V;     // n2 x k, orthonormal columns

  Index size() const { return sigma.size(); }
  /// Numerical rank under kRankTolerance.
  Index rank() const;
  Matrix reconstruct() const;
  /// Leading k triplets.
  SvdFactors truncated(Index k) const;
};

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(const Matrix& M, const char* what);

/// Full thin SVD (k = min(n1, n2)). The first entry of each u_i that is
/// nonzero (above 1e-12 in magnitude) is made nonnegative; v_i follows.
SvdFactors svd(const Matrix& M);

Vector singular_values(const Matrix& M);
double nuclear_norm(const Matrix& M);
double operator_norm(const Matrix& M);
double max_abs(const Matrix& M);

/// <X, Y> = trace(X^T Y).
double inner(const Matrix& X, const Matrix& Y);

/// U diag(max(sigma_i - lambda, 0)) V^T.
Matrix soft_threshold_svals(const Matrix& M, double lambda);

/// Best rank-r approximation sum_{i<=r} sigma_i u_i v_i^T.
Matrix project_rank(const Matrix& M, Index r);

/// Orthonormal basis for the columns of a full-column-rank matrix (thin QR,
/// R with nonnegative diagonal).
Matrix orthonormalize(const Matrix& A);

/// e_i e_j^T of the given shape.
Matrix basis_matrix(Index n1, Index n2, Index i, Index j);

// ---------------------------------------------------------------------------
// random low-rank generation
// ---------------------------------------------------------------------------

struct EqualSpectrum {
  double value = 1.0;
};
struct GeometricSpectrum {
  double top = 1.0;
  double ratio = 0.5;
};
struct ExplicitSpectrum {
  std::vector<double> values;
};
using Spectrum = std::variant<EqualSpectrum, GeometricSpectrum, ExplicitSpectrum>;

struct RandomOrthogonalModel {};
/// Singular vectors are flat on disjoint blocks of `support` coordinates;
/// support = 1 gives u_i = v_i = e_i.
struct SpikyModel {
  Index support = 1;
};
using VectorModel = std::variant<RandomOrthogonalModel, SpikyModel>;

struct LowRankSpec {
  Index n1 = 0;
  Index n2 = 0;
  Index r = 1;
  Spectrum spectrum = EqualSpectrum{};
  VectorModel model = RandomOrthogonalModel{};
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<double> singular_values() const;
};

struct LowRankSample {
  Matrix matrix;
  SvdFactors factors; // rank-r factors used to build `matrix`
};

LowRankSample gen_low_rank(const LowRankSpec& spec);

/// Standard Gaussian n1 x n2 matrix.
Matrix gaussian_matrix(Index n1, Index n2, std::uint64_t seed);

// ---------------------------------------------------------------------------
// lrm-v1 text format: "lrm n1 n2" then n1 lines of n2 values.
// ---------------------------------------------------------------------------

void write_lrm(std::ostream& os, const Matrix& M);
Matrix read_lrm(std::istream& is);
void save_lrm(const std::string& path, const Matrix& M);
Matrix load_lrm(const std::string& path);

/// Sum of squares accumulated in row-major order.
double sum_squares_rowmajor(const Matrix& M);

} // namespace lrr
