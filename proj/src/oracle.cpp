#include "lrr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lrr {

OracleFit oracle_fit(const Matrix& U, const MeasurementEnsemble& A, const Vector& y)
{
  if (U.rows() != A.rows() || U.cols() < 1)
    throw std::invalid_argument("oracle_fit: U must be n1 x r with r >= 1");
  if (y.size() != A.size())
    throw std::invalid_argument("oracle_fit: y length does not match m");
  const Matrix gram = U.transpose() * U;
  if ((gram - Matrix::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("oracle_fit: U must have orthonormal columns");

  const Index r = U.cols();
  const Index n2 = A.cols();
  // Column (b * r + a) is A(u_a e_b^T).
  Matrix B(A.size(), r * n2);
  for (Index b = 0; b < n2; ++b) {
    for (Index a = 0; a < r; ++a) {
      Matrix E = Matrix::Zero(A.rows(), n2);
      E.col(b) = U.col(a);
      B.col(b * r + a) = A.apply(E);
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(B);
  const Vector coef = cod.solve(y);

  OracleFit fit;
  fit.rank_deficient = cod.rank() < B.cols();
  fit.R = Eigen::Map<const Matrix>(coef.data(), r, n2);
  fit.estimate = U * fit.R;
  return fit;
}

double ideal_risk(const std::vector<double>& spectrum, Index n, double noise_sigma)
{
  const double level = static_cast<double>(n) * noise_sigma * noise_sigma;
  double s = 0.0;
  for (double v : spectrum)
    s += std::min(v * v, level);
  return 0.5 * s;
}

double oracle_scan(const std::vector<double>& spectrum, Index n, double noise_sigma)
{
  const double level = static_cast<double>(n) * noise_sigma * noise_sigma;
  double tail = 0.0;
  for (double v : spectrum)
    tail += v * v;
  double best = tail; // r = 0
  for (std::size_t r = 1; r <= spectrum.size(); ++r) {
    tail -= spectrum[r - 1] * spectrum[r - 1];
    best = std::min(best, std::max(tail, 0.0) + static_cast<double>(r) * level);
  }
  return best;
}

BoundReport minimax_bound(Index n, Index r, double noise_sigma, double delta_r)
{
  if (!(delta_r >= 0.0 && delta_r < 1.0))
    throw std::invalid_argument("minimax_bound: delta_r must lie in [0, 1)");
  BoundReport b;
  b.name = "minimax";
  b.up_to_constants = false;
  b.value = static_cast<double>(n) * static_cast<double>(r) * noise_sigma * noise_sigma / (1.0 + delta_r);
  b.inputs = {{"n", double(n)}, {"r", double(r)}, {"sigma", noise_sigma}, {"delta_r", delta_r}};
  return b;
}

BoundReport instance_optimal_bound(const std::vector<double>& spectrum, Index n, double noise_sigma, Index r_bar)
{
  if (r_bar < 1 || r_bar > static_cast<Index>(spectrum.size()))
    throw std::invalid_argument("instance_optimal_bound: r_bar must lie in [1, spectrum length]");
  const double level = static_cast<double>(n) * noise_sigma * noise_sigma;
  double v = 0.0;
  for (Index i = 0; i < static_cast<Index>(spectrum.size()); ++i) {
    const double s2 = spectrum[static_cast<std::size_t>(i)] * spectrum[static_cast<std::size_t>(i)];
    v += i < r_bar ? std::min(s2, level) : s2;
  }
  BoundReport b;
  b.name = "instance";
  b.value = v;
  b.inputs = {{"n", double(n)}, {"sigma", noise_sigma}, {"r_bar", double(r_bar)}};
  return b;
}

BoundReport completion_stability_bound(Index n, double p, double delta)
{
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("completion_stability_bound: p must lie in (0, 1]");
  if (!(delta >= 0.0))
    throw std::invalid_argument("completion_stability_bound: delta must be nonnegative");
  const double cp = 2.0 + p;
  BoundReport b;
  b.name = "stable";
  b.up_to_constants = false;
  b.value = 4.0 * std::sqrt(cp * static_cast<double>(n) / p) * delta + 2.0 * delta;
  b.inputs = {{"n", double(n)}, {"p", p}, {"delta", delta}, {"C_p", cp}};
  return b;
}

BoundReport optspace_noisy_bound(Index n, double m, Index r, double kappa, double noise_opnorm)
{
  if (n < 1 || !(m > 0.0) || r < 1 || !(kappa >= 1.0) || !(noise_opnorm >= 0.0))
    throw std::invalid_argument("optspace_noisy_bound: n, m, r must be positive, kappa >= 1, noise norm >= 0");
  const double nd = static_cast<double>(n);
  BoundReport b;
  b.name = "optspace";
  b.value = kappa * kappa * (nd * nd * std::sqrt(static_cast<double>(r)) / m) * noise_opnorm;
  b.inputs = {{"n", nd}, {"m", m}, {"r", double(r)}, {"kappa", kappa}, {"noise_opnorm", noise_opnorm}};
  return b;
}

double gaussian_noise_opnorm(Index n, double m, double noise_sigma)
{
  const double nd = static_cast<double>(n);
  return std::sqrt(m * std::log(nd) / nd) * noise_sigma;
}

Index rbar_heuristic(Index n, Index m, double c)
{
  return std::max<Index>(1, static_cast<Index>(std::floor(c * static_cast<double>(m) / static_cast<double>(n))));
}

} // namespace lrr
