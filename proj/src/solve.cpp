#include "lrr/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lrr {

void SolverConfig::validate() const
{
  if (max_iters < 1 || !(fista_tol > 0.0) || !(eq_tol > 0.0) || bisection_iters < 1)
    throw std::invalid_argument("SolverConfig: all parameters must be positive");
  if (!(continuation_factor > 0.0 && continuation_factor < 1.0))
    throw std::invalid_argument("SolverConfig: continuation_factor must lie in (0, 1)");
}

double choose_lambda(Index n, double sigma, double c_mult)
{
  if (!(sigma >= 0.0))
    throw std::invalid_argument("choose_lambda: sigma must be nonnegative");
  return c_mult * std::sqrt(2.0 * static_cast<double>(n)) * sigma;
}

double lasso_delta(Index m, double sigma)
{
  const double md = static_cast<double>(m);
  return std::sqrt(md + std::sqrt(8.0 * md)) * sigma;
}

namespace {

struct Prox {
  Matrix X;
  double nuclear = 0.0;
};

/// T_{threshold}(Z) along with its nuclear norm.
Prox shrink(const Matrix& Z, double threshold)
{
  const SvdFactors f = svd(Z);
  Index k = 0;
  while (k < f.size() && f.sigma(k) > threshold)
    ++k;
  Prox p;
  if (k == 0) {
    p.X = Matrix::Zero(Z.rows(), Z.cols());
    return p;
  }
  const Vector s = (f.sigma.head(k).array() - threshold).matrix();
  p.nuclear = s.sum();
  p.X = f.U.leftCols(k) * s.asDiagonal() * f.V.leftCols(k).transpose();
  return p;
}

double dual_residual(const MeasurementEnsemble& A, const Vector& y, const Vector& AX)
{
  return operator_norm(A.adjoint(y - AX));
}

struct Stage {
  Matrix X;
  Vector AX;
  double nuclear = 0.0;
  int iterations = 0;
  bool stationary = false;
  double dual = 0.0;
  std::vector<double> trace;
};

//
// One penalized solve. Stops when the relative change falls below fista_tol
// and the iterate is stationary (dual residual <= tau (1 + slack)), when the
// data residual reaches `residual_target` (if positive), or when `budget`
// iterations are spent. L is carried across stages.
//
Stage fista(const MeasurementEnsemble& A, const Vector& y, double tau, const Matrix& X0, double& L, int budget,
            const SolverConfig& cfg, double residual_target)
{
  Stage st;
  st.X = X0;
  st.AX = A.apply(X0);
  st.nuclear = X0.isZero(0.0) ? 0.0 : nuclear_norm(X0);
  double F = tau * st.nuclear + 0.5 * (st.AX - y).squaredNorm();
  st.trace.push_back(F);

  Matrix Yk = st.X;
  Vector AY = st.AX;
  double t = 1.0;
  bool momentum = false;

  while (st.iterations < budget) {
    const Vector rY = AY - y;
    const double fY = 0.5 * rY.squaredNorm();
    const Matrix G = A.adjoint(rY);

    Prox next;
    Vector AXn;
    double fXn = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      next = shrink(Yk - G / L, tau / L);
      AXn = A.apply(next.X);
      fXn = 0.5 * (AXn - y).squaredNorm();
      const Matrix D = next.X - Yk;
      const double model = fY + inner(G, D) + 0.5 * L * D.squaredNorm();
      if (fXn <= model + 1e-12 * std::max(1.0, std::abs(fY)))
        break;
      L *= 2.0;
    }
    ++st.iterations;
    const double Fn = tau * next.nuclear + fXn;

    if (Fn > F) {
      if (momentum) {
        // Function-value restart from the last accepted point.
        Yk = st.X;
        AY = st.AX;
        t = 1.0;
        momentum = false;
        continue;
      }
      // A plain proximal step cannot decrease F any further.
      st.dual = dual_residual(A, y, st.AX);
      st.stationary = st.dual <= tau * (1.0 + kStationarySlack);
      return st;
    }

    const double change = (next.X - st.X).norm();
    const double scale = std::max(st.X.norm(), next.X.norm());
    const Matrix Xprev = std::move(st.X);
    const Vector AXprev = std::move(st.AX);
    st.X = std::move(next.X);
    st.AX = std::move(AXn);
    st.nuclear = next.nuclear;
    F = Fn;
    st.trace.push_back(F);

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    t = t_next;
    Yk = st.X + beta * (st.X - Xprev);
    AY = st.AX + beta * (st.AX - AXprev);
    momentum = beta > 0.0;

    if (residual_target > 0.0 && (st.AX - y).norm() <= residual_target) {
      st.dual = dual_residual(A, y, st.AX);
      st.stationary = st.dual <= tau * (1.0 + kStationarySlack);
      return st;
    }
    if (change <= cfg.fista_tol * scale) {
      st.dual = dual_residual(A, y, st.AX);
      if (st.dual <= tau * (1.0 + kStationarySlack)) {
        st.stationary = true;
        return st;
      }
    }
  }
  st.dual = dual_residual(A, y, st.AX);
  st.stationary = st.dual <= tau * (1.0 + kStationarySlack);
  return st;
}

SolverReport finish(const MeasurementEnsemble& A, const Vector& y, Matrix X, SolverReport rep)
{
  const Vector AX = A.apply(X);
  rep.equality_residual = (AX - y).norm();
  rep.dual_residual = dual_residual(A, y, AX);
  rep.objective = X.isZero(0.0) ? 0.0 : nuclear_norm(X);
  rep.estimate = std::move(X);
  return rep;
}

SolverReport zero_report(const MeasurementEnsemble& A, const Vector& y, std::string message)
{
  SolverReport rep;
  rep.converged = true;
  rep.message = std::move(message);
  return finish(A, y, Matrix::Zero(A.rows(), A.cols()), std::move(rep));
}

void check_inputs(const MeasurementEnsemble& A, const Vector& y, const SolverConfig& cfg)
{
  cfg.validate();
  if (y.size() != A.size())
    throw std::invalid_argument("solver: y length does not match the ensemble");
  if (!y.allFinite())
    throw std::invalid_argument("solver: y has non-finite entries");
}

} // namespace

SolverReport solve_penalized(const MeasurementEnsemble& A, const Vector& y, double tau, const SolverConfig& cfg,
                             const Matrix& warm_start)
{
  check_inputs(A, y, cfg);
  if (!(tau > 0.0))
    throw std::invalid_argument("solve_penalized: tau must be positive");
  if (y.isZero(0.0))
    return zero_report(A, y, "zero data");
  Matrix X0 = warm_start.size() ? warm_start : Matrix::Zero(A.rows(), A.cols());
  if (X0.rows() != A.rows() || X0.cols() != A.cols())
    throw std::invalid_argument("solve_penalized: warm start has the wrong shape");

  double L = A.lipschitz_estimate();
  Stage st = fista(A, y, tau, X0, L, cfg.max_iters, cfg, 0.0);
  SolverReport rep;
  rep.iterations = st.iterations;
  rep.converged = st.stationary;
  rep.tau_path = {tau};
  rep.residual_path = {(st.AX - y).norm()};
  rep.objective_trace = std::move(st.trace);
  if (!rep.converged)
    rep.message = "iteration cap reached before stationarity";
  return finish(A, y, std::move(st.X), std::move(rep));
}

SolverReport solve_noiseless(const MeasurementEnsemble& A, const Vector& y, const SolverConfig& cfg)
{
  check_inputs(A, y, cfg);
  if (y.isZero(0.0))
    return zero_report(A, y, "zero data");

  const double target = cfg.eq_tol * y.norm();
  const double tau0 = operator_norm(A.adjoint(y));
  const double floor = 1e-12 * tau0;
  double L = A.lipschitz_estimate();

  SolverReport rep;
  Matrix X = Matrix::Zero(A.rows(), A.cols());
  double tau = tau0 * cfg.continuation_factor;
  while (true) {
    Stage st = fista(A, y, tau, X, L, cfg.max_iters - rep.iterations, cfg, target);
    rep.iterations += st.iterations;
    const double res = (st.AX - y).norm();
    rep.tau_path.push_back(tau);
    rep.residual_path.push_back(res);
    rep.objective_trace = std::move(st.trace);
    X = std::move(st.X);
    if (res <= target) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= cfg.max_iters) {
      rep.message = "iteration budget exhausted before feasibility";
      break;
    }
    tau *= cfg.continuation_factor;
    if (tau < floor) {
      rep.message = "tau floor reached before feasibility";
      break;
    }
  }
  return finish(A, y, std::move(X), std::move(rep));
}

SolverReport solve_dantzig(const MeasurementEnsemble& A, const Vector& y, double lambda, const SolverConfig& cfg)
{
  check_inputs(A, y, cfg);
  if (!(lambda > 0.0))
    throw std::invalid_argument("solve_dantzig: lambda must be positive");
  if (y.isZero(0.0))
    return zero_report(A, y, "zero data");
  const double tau0 = operator_norm(A.adjoint(y));
  if (lambda >= tau0)
    return zero_report(A, y, "lambda >= ‖A*(y)‖: zero is optimal");

  double L = A.lipschitz_estimate();
  SolverReport rep;
  Matrix X = Matrix::Zero(A.rows(), A.cols());
  double tau = std::max(lambda, tau0 * cfg.continuation_factor);
  while (true) {
    Stage st = fista(A, y, tau, X, L, cfg.max_iters - rep.iterations, cfg, 0.0);
    rep.iterations += st.iterations;
    rep.tau_path.push_back(tau);
    rep.residual_path.push_back((st.AX - y).norm());
    rep.objective_trace = std::move(st.trace);
    X = std::move(st.X);
    if (tau == lambda) {
      rep.converged = st.stationary;
      if (!rep.converged)
        rep.message = "iteration budget exhausted before stationarity";
      break;
    }
    if (rep.iterations >= cfg.max_iters) {
      rep.message = "iteration budget exhausted during continuation";
      break;
    }
    tau = std::max(lambda, tau * cfg.continuation_factor);
  }
  return finish(A, y, std::move(X), std::move(rep));
}

SolverReport solve_lasso(const MeasurementEnsemble& A, const Vector& y, double delta, const SolverConfig& cfg)
{
  check_inputs(A, y, cfg);
  if (!(delta >= 0.0))
    throw std::invalid_argument("solve_lasso: delta must be nonnegative");
  const double ynorm = y.norm();
  if (delta >= ynorm)
    return zero_report(A, y, "delta >= ‖y‖: zero is feasible");
  // A tolerance-level delta is the equality program.
  if (delta <= cfg.eq_tol * ynorm) {
    SolverReport rep = solve_noiseless(A, y, cfg);
    rep.message = "delta below eq_tol ‖y‖: solved as the equality program";
    return rep;
  }

  const double limit = delta * (1.0 + kStationarySlack);
  const double tau0 = operator_norm(A.adjoint(y));
  const double floor = 1e-12 * tau0;
  double L = A.lipschitz_estimate();

  SolverReport rep;
  Matrix best;
  double best_obj = std::numeric_limits<double>::infinity();
  double best_res = std::numeric_limits<double>::infinity();
  auto consider = [&](const Stage& st, double res) {
    if (res > limit)
      return;
    if (st.nuclear < best_obj || (st.nuclear == best_obj && res < best_res)) {
      best = st.X;
      best_obj = st.nuclear;
      best_res = res;
    }
  };

  Matrix X = Matrix::Zero(A.rows(), A.cols());
  double tau_hi = tau0; // zero solution, infeasible since delta < ‖y‖
  double tau_lo = 0.0;
  Matrix X_lo;
  double tau = tau0 * cfg.continuation_factor;
  while (true) {
    Stage st = fista(A, y, tau, X, L, cfg.max_iters - rep.iterations, cfg, 0.0);
    rep.iterations += st.iterations;
    const double res = (st.AX - y).norm();
    rep.tau_path.push_back(tau);
    rep.residual_path.push_back(res);
    consider(st, res);
    X = st.X;
    if (res <= limit) {
      tau_lo = tau;
      X_lo = st.X;
      break;
    }
    tau_hi = tau;
    if (rep.iterations >= cfg.max_iters) {
      rep.message = "iteration budget exhausted before feasibility";
      return finish(A, y, std::move(X), std::move(rep));
    }
    tau *= cfg.continuation_factor;
    if (tau < floor) {
      rep.message = "tau floor reached before the residual constraint was met";
      return finish(A, y, std::move(X), std::move(rep));
    }
  }

  // Geometric bisection between the feasible tau_lo and the infeasible tau_hi.
  for (int b = 0; b < cfg.bisection_iters && rep.iterations < cfg.max_iters; ++b) {
    if (tau_hi / tau_lo <= 1.0 + 1e-9)
      break;
    const double mid = std::sqrt(tau_lo * tau_hi);
    Stage st = fista(A, y, mid, X_lo, L, cfg.max_iters - rep.iterations, cfg, 0.0);
    rep.iterations += st.iterations;
    const double res = (st.AX - y).norm();
    rep.tau_path.push_back(mid);
    rep.residual_path.push_back(res);
    consider(st, res);
    if (res <= limit) {
      tau_lo = mid;
      X_lo = std::move(st.X);
    } else {
      tau_hi = mid;
    }
  }
  rep.converged = true;
  return finish(A, y, std::move(best), std::move(rep));
}

SolverReport solve_lasso(const ObservationSet& omega, const Vector& y, double delta, const SolverConfig& cfg)
{
  return solve_lasso(MeasurementEnsemble::entry_sampling(omega), y, delta, cfg);
}

} // namespace lrr
