#include "lrr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lrr/random.hpp"

namespace lrr {

CoherenceReport coherence(const SvdFactors& factors)
{
  return coherence(factors, factors.rank());
}

CoherenceReport coherence(const SvdFactors& f, Index r)
{
  if (r < 1 || r > f.size())
    throw std::invalid_argument("coherence: rank must lie in [1, number of singular triplets]");
  const Matrix U = f.U.leftCols(r);
  const Matrix V = f.V.leftCols(r);
  const double n1 = static_cast<double>(U.rows());
  const double n2 = static_cast<double>(V.rows());
  const double rd = static_cast<double>(r);
  const double nmix = std::sqrt(n1 * n2);

  CoherenceReport rep;
  rep.r = r;
  rep.n1 = U.rows();
  rep.n2 = V.rows();

  const double u_inf = max_abs(U);
  const double v_inf = max_abs(V);
  rep.mu_B = std::max(n1 * u_inf * u_inf, n2 * v_inf * v_inf);

  rep.mu0 = std::max((n1 / rd) * U.rowwise().squaredNorm().maxCoeff(), (n2 / rd) * V.rowwise().squaredNorm().maxCoeff());

  rep.mu1 = (nmix / std::sqrt(rd)) * max_abs(U * V.transpose());

  auto strong_dev = [rd](const Matrix& W) {
    const double n = static_cast<double>(W.rows());
    Matrix P = W * W.transpose();
    P.diagonal().array() -= rd / n;
    return (n / std::sqrt(rd)) * max_abs(P);
  };
  rep.mu_strong = std::max({rep.mu1, strong_dev(U), strong_dev(V)});

  const double sigma_r = f.sigma(r - 1);
  if (sigma_r > 0.0) {
    rep.kappa = f.sigma(0) / sigma_r;
    const Vector w = f.sigma.head(r) / sigma_r;
    rep.mu2 = (nmix / std::sqrt(rd)) * max_abs(U * w.asDiagonal() * V.transpose());
  } else {
    rep.kappa = std::numeric_limits<double>::infinity();
    rep.mu2 = std::numeric_limits<double>::infinity();
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

double squares(const Vector& y)
{
  double s = 0.0;
  for (Index i = 0; i < y.size(); ++i)
    s += y(i) * y(i);
  return s;
}

double distortion(const MeasurementEnsemble& A, const Matrix& X)
{
  const double xx = sum_squares_rowmajor(X);
  return std::abs(squares(A.apply(X)) - xx) / xx;
}

} // namespace

RipEstimate rip_probe(const MeasurementEnsemble& A, Index r, Index probes, std::uint64_t seed)
{
  const Index n1 = A.rows();
  const Index n2 = A.cols();
  if (r < 1 || r > std::min(n1, n2))
    throw std::invalid_argument("rip_probe: r must lie in [1, min(n1, n2)]");
  if (probes < 0)
    throw std::invalid_argument("rip_probe: probe count must be nonnegative");

  RipEstimate est{r, 0.0, 0, seed};
  for (Index rho = 1; rho <= r; ++rho) {
    for (Index k = 0; k < probes; ++k) {
      const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(rho), static_cast<std::uint64_t>(k)});
      const Matrix U = orthonormalize(gaussian_matrix(n1, rho, derive_seed(s, {0})));
      const Matrix V = orthonormalize(gaussian_matrix(n2, rho, derive_seed(s, {1})));
      Rng rng(derive_seed(s, {2}));
      Vector spec(rho);
      for (Index i = 0; i < rho; ++i)
        spec(i) = 0.1 + rng.uniform();
      const Matrix X = U * spec.asDiagonal() * V.transpose();
      est.delta_hat = std::max(est.delta_hat, distortion(A, X));
      ++est.probes;
    }
  }
  if (n1 * n2 <= 10000) {
    for (Index i = 0; i < n1; ++i) {
      for (Index j = 0; j < n2; ++j) {
        est.delta_hat = std::max(est.delta_hat, std::abs(squares(A.basis_response(i, j)) - 1.0));
        ++est.probes;
      }
    }
  }
  return est;
}

double concentration_probe(EnsembleKind kind, Index n, Index m, double t, Index trials, std::uint64_t seed)
{
  if (!(t > 0.0 && t < 1.0))
    throw std::invalid_argument("concentration_probe: t must lie in (0, 1)");
  if (n < 1 || m < 1 || trials < 1)
    throw std::invalid_argument("concentration_probe: n, m and trials must be positive");
  Matrix X = gaussian_matrix(n, n, derive_seed(seed, {0xC0FFEE}));
  X /= std::sqrt(sum_squares_rowmajor(X));

  Index violations = 0;
  for (Index k = 0; k < trials; ++k) {
    const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(k)});
    MeasurementEnsemble A = [&] {
      switch (kind) {
      case EnsembleKind::gaussian: return MeasurementEnsemble::gaussian(n, n, m, s);
      case EnsembleKind::rademacher: return MeasurementEnsemble::rademacher(n, n, m, s);
      case EnsembleKind::entry_sampling: return MeasurementEnsemble::entry_sampling(sample_omega(n, n, m, s));
      case EnsembleKind::vectorization: break;
      }
      return MeasurementEnsemble::vectorization(n, n);
    }();
    if (distortion(A, X) > t)
      ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(trials);
}

double chi_square_tail_bound(Index m, double t)
{
  const double md = static_cast<double>(m);
  return 2.0 * std::exp(-(md / 2.0) * (t * t / 2.0 - t * t * t / 3.0));
}

// ---------------------------------------------------------------------------

std::vector<AdvisorRow> theory_advisor(const CoherenceReport& rep, Index n_in, Index r_in, double m)
{
  if (n_in < 2 || r_in < 1)
    throw std::invalid_argument("theory_advisor: need n >= 2 and r >= 1");
  if (!(m >= 0.0))
    throw std::invalid_argument("theory_advisor: m must be nonnegative");
  const double n = static_cast<double>(n_in);
  const double r = static_cast<double>(r_in);
  const double L = std::log(n);
  const double full = n * n;
  const double mu0 = rep.mu0, mu1 = rep.mu1, muB = rep.mu_B, mu = rep.mu_strong, mu2 = rep.mu2, k = rep.kappa;

  std::vector<AdvisorRow> rows;
  auto add = [&](std::string source, std::string req, double value, bool applicable) {
    AdvisorRow row;
    row.source = std::move(source);
    row.requirement = std::move(req);
    row.required = std::isfinite(value) ? std::min(value, full) : full;
    row.applicable = applicable;
    row.ratio = m / row.required;
    row.satisfied = row.ratio >= 1.0;
    rows.push_back(std::move(row));
  };

  // r = O(1) is read as r <= log n.
  const bool small_r = r <= L;
  add("nuclear norm, generic (random orthogonal) M", "n^(5/4) r log n", std::pow(n, 1.25) * r * L, true);
  add("nuclear norm, generic M, r <= n^(1/5)", "n^(6/5) r log n", std::pow(n, 1.2) * r * L, r <= std::pow(n, 0.2));
  add("nuclear norm, incoherent (mu0, mu1)", "max(mu1^2, mu0^(1/2) mu1, mu0 n^(1/4)) n r log n",
      std::max({mu1 * mu1, std::sqrt(mu0) * mu1, mu0 * std::pow(n, 0.25)}) * n * r * L, true);
  add("nuclear norm, incoherent, r <= n^(1/5) / mu0", "mu0 n^(6/5) r log n", mu0 * std::pow(n, 1.2) * r * L,
      r <= std::pow(n, 0.2) / mu0);
  add("nuclear norm, generic M", "n r log^8 n", n * r * std::pow(L, 8), true);
  add("nuclear norm, generic M, r >= log n", "n r log^7 n", n * r * std::pow(L, 7), r >= L);
  add("nuclear norm, generic M, r = O(1)", "n r log^6 n", n * r * std::pow(L, 6), small_r);
  add("nuclear norm, r = O(1), spread mu_B", "mu_B^4 n log^2 n", std::pow(muB, 4) * n * L * L, small_r);
  add("nuclear norm, strong incoherence mu", "mu^2 n r log^6 n", mu * mu * n * r * std::pow(L, 6), true);
  add("nuclear norm, generic M, r <= c1 n", "max(c2 n^2, m0)", full, r <= n);
  add("OPTSPACE (kappa, mu0, mu2)", "n kappa^2 max(mu0 r log n, mu0^2 r^2 kappa^2, mu2^2 r^2 kappa^4)",
      n * k * k * std::max({mu0 * r * L, mu0 * mu0 * r * r * k * k, mu2 * mu2 * r * r * std::pow(k, 4)}), true);
  return rows;
}

} // namespace lrr
