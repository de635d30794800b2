#include "lrr/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lrr/random.hpp"

namespace lrr {

Index SvdFactors::rank() const
{
  if (sigma.size() == 0 || !(sigma(0) > 0.0))
    return 0;
  const double cut = kRankTolerance * sigma(0);
  Index k = 0;
  while (k < sigma.size() && sigma(k) > cut)
    ++k;
  return k;
}

Matrix SvdFactors::reconstruct() const
{
  return U * sigma.asDiagonal() * V.transpose();
}

SvdFactors SvdFactors::truncated(Index k) const
{
  if (k < 0 || k > size())
    throw std::invalid_argument("SvdFactors::truncated: k out of range");
  return {U.leftCols(k), sigma.head(k), V.leftCols(k)};
}

void require_finite(const Matrix& M, const char* what)
{
  if (!M.allFinite())
    throw std::invalid_argument(std::string(what) + ": matrix has non-finite entries");
}

SvdFactors svd(const Matrix& M)
{
  require_finite(M, "svd");
  Eigen::BDCSVD<Matrix> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "svd: decomposition failed to converge for a " << M.rows() << "x" << M.cols() << " matrix";
    throw std::runtime_error(msg.str());
  }
  SvdFactors f{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  for (Index i = 0; i < f.U.cols(); ++i) {
    for (Index k = 0; k < f.U.rows(); ++k) {
      const double x = f.U(k, i);
      if (std::abs(x) > 1e-12) {
        if (x < 0.0) {
          f.U.col(i) *= -1.0;
          f.V.col(i) *= -1.0;
        }
        break;
      }
    }
  }
  return f;
}

Vector singular_values(const Matrix& M)
{
  require_finite(M, "singular_values");
  Eigen::BDCSVD<Matrix> dec(M);
  if (dec.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "singular_values: decomposition failed to converge for a " << M.rows() << "x" << M.cols()
        << " matrix";
    throw std::runtime_error(msg.str());
  }
  return dec.singularValues();
}

double nuclear_norm(const Matrix& M)
{
  return singular_values(M).sum();
}

double operator_norm(const Matrix& M)
{
  if (M.size() == 0)
    return 0.0;
  return singular_values(M)(0);
}

double max_abs(const Matrix& M)
{
  return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

double inner(const Matrix& X, const Matrix& Y)
{
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw std::invalid_argument("inner: dimension mismatch");
  return X.cwiseProduct(Y).sum();
}

Matrix soft_threshold_svals(const Matrix& M, double lambda)
{
  if (!(lambda >= 0.0))
    throw std::invalid_argument("soft_threshold_svals: lambda must be nonnegative");
  const SvdFactors f = svd(M);
  Index k = 0;
  while (k < f.size() && f.sigma(k) > lambda)
    ++k;
  if (k == 0)
    return Matrix::Zero(M.rows(), M.cols());
  const Vector shrunk = (f.sigma.head(k).array() - lambda).matrix();
  return f.U.leftCols(k) * shrunk.asDiagonal() * f.V.leftCols(k).transpose();
}

Matrix project_rank(const Matrix& M, Index r)
{
  if (r < 1 || r > std::min(M.rows(), M.cols()))
    throw std::invalid_argument("project_rank: r out of range [1, min(n1, n2)]");
  return svd(M).truncated(r).reconstruct();
}

Matrix orthonormalize(const Matrix& A)
{
  const Index n = A.rows();
  const Index k = A.cols();
  if (k > n)
    throw std::invalid_argument("orthonormalize: more columns than rows");
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, k);
  const Matrix& R = qr.matrixQR();
  for (Index j = 0; j < k; ++j)
    if (R(j, j) < 0.0)
      Q.col(j) *= -1.0;
  return Q;
}

Matrix basis_matrix(Index n1, Index n2, Index i, Index j)
{
  if (i < 0 || i >= n1 || j < 0 || j >= n2)
    throw std::invalid_argument("basis_matrix: index out of range");
  Matrix E = Matrix::Zero(n1, n2);
  E(i, j) = 1.0;
  return E;
}

double sum_squares_rowmajor(const Matrix& M)
{
  double s = 0.0;
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j)
      s += M(i, j) * M(i, j);
  return s;
}

// ---------------------------------------------------------------------------

std::vector<double> LowRankSpec::singular_values() const
{
  std::vector<double> s;
  if (const auto* eq = std::get_if<EqualSpectrum>(&spectrum)) {
    s.assign(static_cast<std::size_t>(r), eq->value);
  } else if (const auto* geo = std::get_if<GeometricSpectrum>(&spectrum)) {
    double v = geo->top;
    for (Index i = 0; i < r; ++i, v *= geo->ratio)
      s.push_back(v);
  } else {
    s = std::get<ExplicitSpectrum>(spectrum).values;
  }
  return s;
}

void LowRankSpec::validate() const
{
  if (n1 < 1 || n2 < 1)
    throw std::invalid_argument("LowRankSpec: dimensions must be positive");
  if (r < 1 || r > std::min(n1, n2))
    throw std::invalid_argument("LowRankSpec: r must lie in [1, min(n1, n2)]");
  if (const auto* geo = std::get_if<GeometricSpectrum>(&spectrum)) {
    if (!(geo->ratio > 0.0 && geo->ratio <= 1.0))
      throw std::invalid_argument("LowRankSpec: geometric ratio must lie in (0, 1]");
  }
  const auto s = singular_values();
  if (static_cast<Index>(s.size()) != r)
    throw std::invalid_argument("LowRankSpec: explicit spectrum length must equal r");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0) || !std::isfinite(s[i]))
      throw std::invalid_argument("LowRankSpec: spectrum values must be positive and finite");
    if (i > 0 && s[i] > s[i - 1])
      throw std::invalid_argument("LowRankSpec: spectrum must be nonincreasing");
  }
  if (const auto* spiky = std::get_if<SpikyModel>(&model)) {
    if (spiky->support < 1 || r * spiky->support > std::min(n1, n2))
      throw std::invalid_argument("LowRankSpec: spiky support must satisfy 1 <= r * support <= min(n1, n2)");
  }
}

Matrix gaussian_matrix(Index n1, Index n2, std::uint64_t seed)
{
  Rng rng(seed);
  Matrix G(n1, n2);
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j)
      G(i, j) = rng.normal();
  return G;
}

namespace {

Matrix spiky_factor(Index n, Index r, Index support)
{
  Matrix F = Matrix::Zero(n, r);
  const double v = 1.0 / std::sqrt(static_cast<double>(support));
  for (Index i = 0; i < r; ++i)
    F.block(i * support, i, support, 1).setConstant(v);
  return F;
}

} // namespace

LowRankSample gen_low_rank(const LowRankSpec& spec)
{
  spec.validate();
  const auto s = spec.singular_values();
  SvdFactors f;
  f.sigma = Eigen::Map<const Vector>(s.data(), static_cast<Index>(s.size()));
  if (const auto* spiky = std::get_if<SpikyModel>(&spec.model)) {
    f.U = spiky_factor(spec.n1, spec.r, spiky->support);
    f.V = spiky_factor(spec.n2, spec.r, spiky->support);
  } else {
    f.U = orthonormalize(gaussian_matrix(spec.n1, spec.r, derive_seed(spec.seed, {0})));
    f.V = orthonormalize(gaussian_matrix(spec.n2, spec.r, derive_seed(spec.seed, {1})));
  }
  Matrix M = f.reconstruct();
  return {std::move(M), std::move(f)};
}

// ---------------------------------------------------------------------------

void write_lrm(std::ostream& os, const Matrix& M)
{
  require_finite(M, "write_lrm");
  os << "lrm " << M.rows() << ' ' << M.cols() << '\n';
  char buf[32];
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", M(i, j));
      if (j)
        os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

Matrix read_lrm(std::istream& is)
{
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("read_lrm: missing header");
  std::istringstream header(line);
  std::string tag;
  long long n1 = 0, n2 = 0;
  if (!(header >> tag >> n1 >> n2) || tag != "lrm" || n1 < 1 || n2 < 1)
    throw std::runtime_error("read_lrm: malformed header, expected 'lrm n1 n2'");
  std::string extra;
  if (header >> extra)
    throw std::runtime_error("read_lrm: trailing tokens in header");

  Matrix M(n1, n2);
  Index row = 0;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    if (row >= n1)
      throw std::runtime_error("read_lrm: more rows than declared in header");
    std::istringstream ls(line);
    Index col = 0;
    std::string tok;
    while (ls >> tok) {
      if (col >= n2)
        throw std::runtime_error("read_lrm: row " + std::to_string(row) + " has more than n2 values");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v))
        throw std::runtime_error("read_lrm: bad value '" + tok + "'");
      M(row, col++) = v;
    }
    if (col != n2)
      throw std::runtime_error("read_lrm: row " + std::to_string(row) + " has " + std::to_string(col) +
                               " values, expected " + std::to_string(n2));
    ++row;
  }
  if (row != n1)
    throw std::runtime_error("read_lrm: found " + std::to_string(row) + " rows, expected " + std::to_string(n1));
  return M;
}

void save_lrm(const std::string& path, const Matrix& M)
{
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  write_lrm(os, M);
  if (!os)
    throw std::runtime_error("write to '" + path + "' failed");
}

Matrix load_lrm(const std::string& path)
{
  std::ifstream is(path);
  if (!is)
    throw std::runtime_error("cannot open '" + path + "'");
  return read_lrm(is);
}

} // namespace lrr
