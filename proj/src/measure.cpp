#include "lrr/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "lrr/random.hpp"

namespace lrr {

std::string to_string(EnsembleKind kind)
{
  switch (kind) {
  case EnsembleKind::gaussian: return "gaussian";
  case EnsembleKind::rademacher: return "rademacher";
  case EnsembleKind::entry_sampling: return "entry-sampling";
  case EnsembleKind::vectorization: return "vectorization";
  }
  return "unknown";
}

EnsembleKind parse_ensemble_kind(const std::string& name)
{
  if (name == "gaussian")
    return EnsembleKind::gaussian;
  if (name == "rademacher")
    return EnsembleKind::rademacher;
  if (name == "entry-sampling" || name == "entry")
    return EnsembleKind::entry_sampling;
  if (name == "vectorization")
    return EnsembleKind::vectorization;
  throw std::invalid_argument("unknown ensemble kind '" + name + "'");
}

// ---------------------------------------------------------------------------

ObservationSet::ObservationSet(Index n1, Index n2, std::vector<Entry> pairs)
    : n1_(n1), n2_(n2), pairs_(std::move(pairs))
{
  if (n1 < 1 || n2 < 1)
    throw std::invalid_argument("ObservationSet: dimensions must be positive");
  for (const auto& [i, j] : pairs_)
    if (i < 0 || i >= n1 || j < 0 || j >= n2)
      throw std::invalid_argument("ObservationSet: pair out of range");
  std::sort(pairs_.begin(), pairs_.end());
  if (std::adjacent_find(pairs_.begin(), pairs_.end()) != pairs_.end())
    throw std::invalid_argument("ObservationSet: duplicate pair");
}

double ObservationSet::fraction() const
{
  return static_cast<double>(pairs_.size()) / (static_cast<double>(n1_) * static_cast<double>(n2_));
}

bool ObservationSet::contains(Index i, Index j) const
{
  return std::binary_search(pairs_.begin(), pairs_.end(), Entry{i, j});
}

std::vector<Index> ObservationSet::row_degrees() const
{
  std::vector<Index> d(static_cast<std::size_t>(n1_), 0);
  for (const auto& e : pairs_)
    ++d[static_cast<std::size_t>(e.first)];
  return d;
}

std::vector<Index> ObservationSet::col_degrees() const
{
  std::vector<Index> d(static_cast<std::size_t>(n2_), 0);
  for (const auto& e : pairs_)
    ++d[static_cast<std::size_t>(e.second)];
  return d;
}

ObservationSet sample_omega(Index n1, Index n2, Index m, std::uint64_t seed)
{
  if (n1 < 1 || n2 < 1)
    throw std::invalid_argument("sample_omega: dimensions must be positive");
  const std::uint64_t total = static_cast<std::uint64_t>(n1) * static_cast<std::uint64_t>(n2);
  if (m < 1 || static_cast<std::uint64_t>(m) > total)
    throw std::invalid_argument("sample_omega: m must lie in [1, n1 n2]");

  Rng rng(seed);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(m) * 2);
  for (std::uint64_t j = total - static_cast<std::uint64_t>(m); j < total; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second)
      chosen.insert(j);
  }
  std::vector<ObservationSet::Entry> pairs;
  pairs.reserve(chosen.size());
  for (auto k : chosen)
    pairs.emplace_back(static_cast<Index>(k / static_cast<std::uint64_t>(n2)),
                       static_cast<Index>(k % static_cast<std::uint64_t>(n2)));
  return ObservationSet(n1, n2, std::move(pairs));
}

Matrix project_omega(const ObservationSet& omega, const Matrix& X)
{
  if (X.rows() != omega.rows() || X.cols() != omega.cols())
    throw std::invalid_argument("project_omega: dimension mismatch");
  Matrix P = Matrix::Zero(X.rows(), X.cols());
  for (const auto& [i, j] : omega.pairs())
    P(i, j) = X(i, j);
  return P;
}

// ---------------------------------------------------------------------------

MeasurementEnsemble MeasurementEnsemble::dense(EnsembleKind kind, Index n1, Index n2, Index m, std::uint64_t seed)
{
  if (n1 < 1 || n2 < 1 || m < 1)
    throw std::invalid_argument("MeasurementEnsemble: n1, n2, m must be positive");
  MeasurementEnsemble A;
  A.kind_ = kind;
  A.n1_ = n1;
  A.n2_ = n2;
  A.m_ = m;
  A.seed_ = seed;
  auto S = std::make_shared<Matrix>(m, n1 * n2);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Rng rng(seed);
  // Draw A_i entry by entry in row-major order.
  for (Index k = 0; k < m; ++k)
    for (Index i = 0; i < n1; ++i)
      for (Index j = 0; j < n2; ++j)
        (*S)(k, j * n1 + i) = scale * (kind == EnsembleKind::gaussian ? rng.normal() : rng.sign());
  A.rows_ = std::move(S);
  return A;
}

MeasurementEnsemble MeasurementEnsemble::gaussian(Index n1, Index n2, Index m, std::uint64_t seed)
{
  return dense(EnsembleKind::gaussian, n1, n2, m, seed);
}

MeasurementEnsemble MeasurementEnsemble::rademacher(Index n1, Index n2, Index m, std::uint64_t seed)
{
  return dense(EnsembleKind::rademacher, n1, n2, m, seed);
}

MeasurementEnsemble MeasurementEnsemble::entry_sampling(ObservationSet omega)
{
  MeasurementEnsemble A;
  A.kind_ = EnsembleKind::entry_sampling;
  A.n1_ = omega.rows();
  A.n2_ = omega.cols();
  A.m_ = omega.size();
  if (A.n1_ < 1 || A.n2_ < 1)
    throw std::invalid_argument("MeasurementEnsemble: empty observation set dimensions");
  A.omega_ = std::move(omega);
  return A;
}

MeasurementEnsemble MeasurementEnsemble::vectorization(Index n1, Index n2)
{
  if (n1 < 1 || n2 < 1)
    throw std::invalid_argument("MeasurementEnsemble: dimensions must be positive");
  MeasurementEnsemble A;
  A.kind_ = EnsembleKind::vectorization;
  A.n1_ = n1;
  A.n2_ = n2;
  A.m_ = n1 * n2;
  return A;
}

void MeasurementEnsemble::check_matrix(const Matrix& X, const char* what) const
{
  if (X.rows() != n1_ || X.cols() != n2_) {
    std::ostringstream msg;
    msg << what << ": expected a " << n1_ << "x" << n2_ << " matrix, got " << X.rows() << "x" << X.cols();
    throw std::invalid_argument(msg.str());
  }
}

Vector MeasurementEnsemble::apply(const Matrix& X) const
{
  check_matrix(X, "apply");
  switch (kind_) {
  case EnsembleKind::vectorization: {
    Vector y(m_);
    Index k = 0;
    for (Index i = 0; i < n1_; ++i)
      for (Index j = 0; j < n2_; ++j)
        y(k++) = X(i, j);
    return y;
  }
  case EnsembleKind::entry_sampling: {
    Vector y(m_);
    Index k = 0;
    for (const auto& [i, j] : omega_.pairs())
      y(k++) = X(i, j);
    return y;
  }
  default:
    return (*rows_) * Eigen::Map<const Vector>(X.data(), X.size());
  }
}

Matrix MeasurementEnsemble::adjoint(const Vector& v) const
{
  if (v.size() != m_)
    throw std::invalid_argument("adjoint: vector length " + std::to_string(v.size()) + " does not match m = " +
                                std::to_string(m_));
  switch (kind_) {
  case EnsembleKind::vectorization: {
    Matrix X(n1_, n2_);
    Index k = 0;
    for (Index i = 0; i < n1_; ++i)
      for (Index j = 0; j < n2_; ++j)
        X(i, j) = v(k++);
    return X;
  }
  case EnsembleKind::entry_sampling: {
    Matrix X = Matrix::Zero(n1_, n2_);
    Index k = 0;
    for (const auto& [i, j] : omega_.pairs())
      X(i, j) = v(k++);
    return X;
  }
  default: {
    Vector flat = rows_->transpose() * v;
    return Eigen::Map<const Matrix>(flat.data(), n1_, n2_);
  }
  }
}

Matrix MeasurementEnsemble::sensing_matrix(Index k) const
{
  if (k < 0 || k >= m_)
    throw std::invalid_argument("sensing_matrix: index out of range");
  switch (kind_) {
  case EnsembleKind::vectorization: return basis_matrix(n1_, n2_, k / n2_, k % n2_);
  case EnsembleKind::entry_sampling: {
    const auto& [i, j] = omega_.pairs()[static_cast<std::size_t>(k)];
    return basis_matrix(n1_, n2_, i, j);
  }
  default: {
    Vector row = rows_->row(k).transpose();
    return Eigen::Map<const Matrix>(row.data(), n1_, n2_);
  }
  }
}

Vector MeasurementEnsemble::basis_response(Index i, Index j) const
{
  if (i < 0 || i >= n1_ || j < 0 || j >= n2_)
    throw std::invalid_argument("basis_response: index out of range");
  switch (kind_) {
  case EnsembleKind::vectorization: {
    Vector y = Vector::Zero(m_);
    y(i * n2_ + j) = 1.0;
    return y;
  }
  case EnsembleKind::entry_sampling: {
    Vector y = Vector::Zero(m_);
    const auto& pairs = omega_.pairs();
    const auto it = std::lower_bound(pairs.begin(), pairs.end(), ObservationSet::Entry{i, j});
    if (it != pairs.end() && *it == ObservationSet::Entry{i, j})
      y(it - pairs.begin()) = 1.0;
    return y;
  }
  default: return rows_->col(j * n1_ + i);
  }
}

double MeasurementEnsemble::lipschitz_estimate() const
{
  if (kind_ == EnsembleKind::vectorization || kind_ == EnsembleKind::entry_sampling)
    return 1.0;
  // Power iteration on S^T S; the Rayleigh quotient approaches from below,
  // so callers pair this with backtracking.
  const Matrix& S = *rows_;
  Rng rng(derive_seed(seed_, {0x4c495053}));
  Vector x(S.cols());
  for (Index i = 0; i < x.size(); ++i)
    x(i) = rng.normal();
  x.normalize();
  double est = 0.0;
  for (int it = 0; it < 60; ++it) {
    Vector w = S.transpose() * (S * x);
    const double next = x.dot(w);
    const double nw = w.norm();
    if (nw == 0.0)
      return 1.0;
    x = w / nw;
    if (it > 5 && std::abs(next - est) <= 1e-4 * next) {
      est = next;
      break;
    }
    est = next;
  }
  return 1.02 * est;
}

// ---------------------------------------------------------------------------

Vector add_noise(const Vector& y, const NoiseModel& noise)
{
  if (!(noise.sigma >= 0.0))
    throw std::invalid_argument("add_noise: sigma must be nonnegative");
  if (noise.sigma == 0.0)
    return y;
  Rng rng(noise.seed);
  Vector out = y;
  for (Index i = 0; i < out.size(); ++i)
    out(i) += noise.sigma * rng.normal();
  return out;
}

RecoveryProblem RecoveryProblem::from_truth(MeasurementEnsemble ensemble, Matrix truth, NoiseModel noise)
{
  Vector y = add_noise(ensemble.apply(truth), noise);
  RecoveryProblem p{std::move(ensemble), std::move(y), noise, std::move(truth)};
  p.validate();
  return p;
}

void RecoveryProblem::validate() const
{
  if (y.size() != ensemble.size())
    throw std::invalid_argument("RecoveryProblem: y length does not match m");
  if (!y.allFinite())
    throw std::invalid_argument("RecoveryProblem: y has non-finite entries");
  if (truth && (truth->rows() != ensemble.rows() || truth->cols() != ensemble.cols()))
    throw std::invalid_argument("RecoveryProblem: truth dimensions do not match ensemble");
}

// ---------------------------------------------------------------------------

void write_omega(std::ostream& os, const ObservationSet& omega)
{
  os << "omega " << omega.rows() << ' ' << omega.cols() << ' ' << omega.size() << '\n';
  for (const auto& [i, j] : omega.pairs())
    os << i << ' ' << j << '\n';
}

ObservationSet read_omega(std::istream& is)
{
  std::string tag;
  long long n1 = 0, n2 = 0, m = -1;
  if (!(is >> tag >> n1 >> n2 >> m) || tag != "omega" || n1 < 1 || n2 < 1 || m < 0)
    throw std::runtime_error("read_omega: malformed header, expected 'omega n1 n2 m'");
  std::vector<ObservationSet::Entry> pairs;
  pairs.reserve(static_cast<std::size_t>(m));
  for (long long k = 0; k < m; ++k) {
    long long i = 0, j = 0;
    if (!(is >> i >> j))
      throw std::runtime_error("read_omega: expected " + std::to_string(m) + " pairs, found " + std::to_string(k));
    pairs.emplace_back(i, j);
  }
  std::string extra;
  if (is >> extra)
    throw std::runtime_error("read_omega: more pairs than declared");
  return ObservationSet(n1, n2, std::move(pairs));
}

void save_omega(const std::string& path, const ObservationSet& omega)
{
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  write_omega(os, omega);
}

ObservationSet load_omega(const std::string& path)
{
  std::ifstream is(path);
  if (!is)
    throw std::runtime_error("cannot open '" + path + "'");
  return read_omega(is);
}

void write_vector(std::ostream& os, const Vector& v)
{
  char buf[32];
  for (Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v(i));
    os << buf << '\n';
  }
}

Vector read_vector(std::istream& is)
{
  std::vector<double> vals;
  std::string tok;
  while (is >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size())
      throw std::runtime_error("read_vector: bad value '" + tok + "'");
    vals.push_back(v);
  }
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

} // namespace lrr
