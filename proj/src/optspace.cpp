#include "lrr/optspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lrr {

void OptspaceConfig::validate() const
{
  if (max_iters < 1 || !(grad_tol > 0.0) || !(trim_multiplier > 0.0))
    throw std::invalid_argument("OptspaceConfig: parameters must be positive");
  if (!(shrink > 0.0 && shrink < 1.0) || !(sufficient_decrease > 0.0 && sufficient_decrease < 1.0))
    throw std::invalid_argument("OptspaceConfig: shrink and sufficient_decrease must lie in (0, 1)");
}

TrimResult trim(const Matrix& Y_obs, const ObservationSet& omega, double multiplier)
{
  if (Y_obs.rows() != omega.rows() || Y_obs.cols() != omega.cols())
    throw std::invalid_argument("trim: dimension mismatch");
  if (!(multiplier > 0.0))
    throw std::invalid_argument("trim: multiplier must be positive");

  ObservationSet current = omega;
  while (!current.empty()) {
    const double m = static_cast<double>(current.size());
    const double row_cap = multiplier * m / static_cast<double>(current.rows());
    const double col_cap = multiplier * m / static_cast<double>(current.cols());
    const auto rdeg = current.row_degrees();
    const auto cdeg = current.col_degrees();
    std::vector<ObservationSet::Entry> kept;
    kept.reserve(current.pairs().size());
    for (const auto& e : current.pairs())
      if (static_cast<double>(rdeg[static_cast<std::size_t>(e.first)]) <= row_cap &&
          static_cast<double>(cdeg[static_cast<std::size_t>(e.second)]) <= col_cap)
        kept.push_back(e);
    if (kept.size() == current.pairs().size())
      break;
    current = ObservationSet(omega.rows(), omega.cols(), std::move(kept));
  }
  return {project_omega(current, Y_obs), std::move(current)};
}

Index estimate_rank(const Matrix& trimmed, double p)
{
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("estimate_rank: p must lie in (0, 1]");
  if (trimmed.isZero(0.0))
    throw std::invalid_argument("estimate_rank: matrix is zero");
  const Vector s = singular_values(trimmed / p);
  const double cut = kRankTolerance * s(0);
  Index k = 0;
  while (k < s.size() && s(k) > cut)
    ++k;
  if (k < s.size())
    return k;
  Index best = 1;
  double best_ratio = 0.0;
  for (Index i = 0; i + 1 < k; ++i) {
    const double ratio = s(i) / s(i + 1);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = i + 1;
    }
  }
  return best;
}

OptspaceState spectral_init(const Matrix& trimmed, const ObservationSet& omega_trimmed, Index r)
{
  if (r < 1)
    throw std::invalid_argument("spectral_init: r must be positive");
  if (trimmed.rows() != omega_trimmed.rows() || trimmed.cols() != omega_trimmed.cols())
    throw std::invalid_argument("spectral_init: dimension mismatch");
  if (omega_trimmed.empty())
    throw std::invalid_argument("spectral_init: no observed entries left after trimming");
  const double p = omega_trimmed.fraction();
  const SvdFactors f = svd(trimmed / p);
  const Index achievable = f.rank();
  if (r > achievable)
    throw std::invalid_argument("spectral_init: requested rank " + std::to_string(r) +
                                " exceeds the numerical rank " + std::to_string(achievable) +
                                " of the trimmed matrix");
  OptspaceState st;
  st.U = f.U.leftCols(r);
  st.V = f.V.leftCols(r);
  st.S = f.sigma.head(r).asDiagonal();
  st.objective = factored_objective(st.U, st.S, st.V, trimmed, omega_trimmed);
  return st;
}

Matrix optimal_middle(const Matrix& U, const Matrix& V, const Matrix& Y_obs, const ObservationSet& omega,
                      bool* ridge_used)
{
  const Index r = U.cols();
  const Index q = r * r;
  Matrix G = Matrix::Zero(q, q);
  Vector h = Vector::Zero(q);
  Vector phi(q);
  for (const auto& [i, j] : omega.pairs()) {
    for (Index a = 0; a < r; ++a)
      for (Index b = 0; b < r; ++b)
        phi(a * r + b) = U(i, a) * V(j, b);
    G.selfadjointView<Eigen::Lower>().rankUpdate(phi);
    h += Y_obs(i, j) * phi;
  }
  G = G.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().size() ? eig.eigenvalues().maxCoeff() : 0.0;
  const double bottom = eig.eigenvalues().size() ? eig.eigenvalues().minCoeff() : 0.0;
  if (ridge_used)
    *ridge_used = false;
  if (!(bottom > 1e-12 * top)) {
    G.diagonal().array() += 1e-12 * std::max(top, 1.0);
    if (ridge_used)
      *ridge_used = true;
  }
  const Vector s = G.ldlt().solve(h);
  Matrix S(r, r);
  for (Index a = 0; a < r; ++a)
    for (Index b = 0; b < r; ++b)
      S(a, b) = s(a * r + b);
  return S;
}

double factored_objective(const Matrix& U, const Matrix& S, const Matrix& V, const Matrix& Y_obs,
                          const ObservationSet& omega)
{
  const Matrix US = U * S;
  double f = 0.0;
  for (const auto& [i, j] : omega.pairs()) {
    const double d = US.row(i).dot(V.row(j)) - Y_obs(i, j);
    f += d * d;
  }
  return 0.5 * f;
}

namespace {

struct Gradient {
  Matrix U;
  Matrix V;
  double norm = 0.0;
};

Gradient riemannian_gradient(const OptspaceState& st, const Matrix& Y_obs, const ObservationSet& omega)
{
  const Matrix US = st.U * st.S;
  const Matrix VSt = st.V * st.S.transpose();
  Gradient g{Matrix::Zero(st.U.rows(), st.U.cols()), Matrix::Zero(st.V.rows(), st.V.cols()), 0.0};
  for (const auto& [i, j] : omega.pairs()) {
    const double res = US.row(i).dot(st.V.row(j)) - Y_obs(i, j);
    g.U.row(i) += res * VSt.row(j);
    g.V.row(j) += res * US.row(i);
  }
  g.U -= st.U * (st.U.transpose() * g.U);
  g.V -= st.V * (st.V.transpose() * g.V);
  g.norm = std::sqrt(g.U.squaredNorm() + g.V.squaredNorm());
  return g;
}

} // namespace

OptspaceState optspace_descent(OptspaceState st, const Matrix& Y_obs, const ObservationSet& omega,
                               const OptspaceConfig& cfg)
{
  cfg.validate();
  if (Y_obs.rows() != omega.rows() || Y_obs.cols() != omega.cols() || st.U.rows() != Y_obs.rows() ||
      st.V.rows() != Y_obs.cols() || st.U.cols() != st.V.cols() || st.U.cols() < 1)
    throw std::invalid_argument("optspace_descent: state and data dimensions disagree");

  bool ridge = false;
  st.S = optimal_middle(st.U, st.V, Y_obs, omega, &ridge);
  st.ridge_used = st.ridge_used || ridge;
  st.objective = factored_objective(st.U, st.S, st.V, Y_obs, omega);
  st.objective_trace = {st.objective};
  st.converged = false;

  const double p = std::max(omega.fraction(), 1e-12);
  const double s1 = std::max(operator_norm(st.S), 1e-300);
  double step = 1.0 / (p * s1 * s1);

  while (st.iteration < cfg.max_iters) {
    const Gradient g = riemannian_gradient(st, Y_obs, omega);
    st.grad_norm = g.norm;
    if (g.norm <= cfg.grad_tol || st.objective == 0.0) {
      st.converged = true;
      return st;
    }
    double t = 2.0 * step;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries, t *= cfg.shrink) {
      OptspaceState trial;
      trial.U = orthonormalize(st.U - t * g.U);
      trial.V = orthonormalize(st.V - t * g.V);
      bool trial_ridge = false;
      trial.S = optimal_middle(trial.U, trial.V, Y_obs, omega, &trial_ridge);
      const double f = factored_objective(trial.U, trial.S, trial.V, Y_obs, omega);
      if (f <= st.objective - cfg.sufficient_decrease * t * g.norm * g.norm) {
        st.U = std::move(trial.U);
        st.V = std::move(trial.V);
        st.S = std::move(trial.S);
        st.objective = f;
        st.ridge_used = st.ridge_used || trial_ridge;
        accepted = true;
        step = t;
        break;
      }
    }
    if (!accepted)
      return st; // no representable descent step: stalled
    ++st.iteration;
    st.objective_trace.push_back(st.objective);
  }
  st.grad_norm = riemannian_gradient(st, Y_obs, omega).norm;
  st.converged = st.grad_norm <= cfg.grad_tol;
  return st;
}

OptspaceRun optspace_run(const Matrix& Y_obs, const ObservationSet& omega, std::optional<Index> rank,
                         const OptspaceConfig& cfg)
{
  cfg.validate();
  TrimResult tr = trim(Y_obs, omega, cfg.trim_multiplier);
  if (tr.omega.empty())
    throw std::invalid_argument("optspace: no observed entries left after trimming");
  const Index r = rank ? *rank : estimate_rank(tr.trimmed, tr.omega.fraction());
  OptspaceState init = spectral_init(tr.trimmed, tr.omega, r);
  OptspaceState st = optspace_descent(std::move(init), Y_obs, omega, cfg);

  const MeasurementEnsemble A = MeasurementEnsemble::entry_sampling(omega);
  const Vector y = A.apply(Y_obs);
  SolverReport rep;
  rep.estimate = st.estimate();
  const Vector AX = A.apply(rep.estimate);
  rep.equality_residual = (AX - y).norm();
  rep.dual_residual = operator_norm(A.adjoint(y - AX));
  rep.objective = nuclear_norm(rep.estimate);
  rep.iterations = st.iteration;
  rep.converged = st.converged;
  rep.objective_trace = st.objective_trace;
  if (!st.converged)
    rep.message = st.iteration >= cfg.max_iters ? "iteration cap reached" : "line search stalled";
  if (st.ridge_used)
    rep.message += rep.message.empty() ? "ridge-regularized inner solve" : "; ridge-regularized inner solve";
  return {std::move(rep), std::move(st), r, std::move(tr.omega)};
}

SolverReport optspace(const Matrix& Y_obs, const ObservationSet& omega, std::optional<Index> rank,
                      const OptspaceConfig& cfg)
{
  return optspace_run(Y_obs, omega, rank, cfg).report;
}

} // namespace lrr
