#pragma once
//
// Nuclear-norm recovery programs:
//   noiseless   minimize ‖X‖_*  s.t.  A(X) = y
//   Dantzig     minimize ‖X‖_*  s.t.  ‖A^*(y − A(X))‖ <= lambda
//   Lasso       minimize ‖X‖_*  s.t.  ‖A(X) − y‖_2 <= delta
// all driven by one accelerated proximal-gradient solver for the penalized
// problem tau ‖X‖_* + ½‖A(X) − y‖².
//

#include <string>
#include <vector>

#include "lrr/matcore.hpp"
#include "lrr/measure.hpp"

namespace lrr {

struct SolverConfig {
  int max_iters = 2000;              // total proximal iterations per call
  double fista_tol = 1e-8;           // relative change ‖X_{k+1} − X_k‖_F / ‖X_k‖_F
  double eq_tol = 1e-6;              // ‖A(X) − y‖ <= eq_tol ‖y‖ for the equality program
  double continuation_factor = 0.25; // tau_{k+1} = factor * tau_k
  int bisection_iters = 40;

  void validate() const;
};

/// Stationarity slack: dual_residual <= tau (1 + kStationarySlack).
inline constexpr double kStationarySlack = 1e-6;

struct SolverReport {
  Matrix estimate;
  double objective = 0.0;         // ‖estimate‖_*
  double equality_residual = 0.0; // ‖A(estimate) − y‖_2
  double dual_residual = 0.0;     // ‖A^*(y − A(estimate))‖ (operator norm)
  int iterations = 0;
  bool converged = false;
  std::vector<double> tau_path;      // penalties visited, in order
  std::vector<double> residual_path; // equality residual reached at each tau_path entry
  std::vector<double> objective_trace; // penalized objective per accepted step (last penalized solve)
  std::string message;
};

/// Accelerated proximal gradient with backtracking and function-value restart.
/// `warm_start` may be empty (zero start).
SolverReport solve_penalized(const MeasurementEnsemble& A, const Vector& y, double tau, const SolverConfig& config,
                             const Matrix& warm_start = Matrix());

/// Equality-constrained program by continuation in tau.
SolverReport solve_noiseless(const MeasurementEnsemble& A, const Vector& y, const SolverConfig& config = {});

/// c_mult * sqrt(2 n) * sigma.
double choose_lambda(Index n, double sigma, double c_mult = 1.1);

/// Penalized solution at tau = lambda (reached by continuation), which is
/// Dantzig-feasible by stationarity.
SolverReport solve_dantzig(const MeasurementEnsemble& A, const Vector& y, double lambda,
                           const SolverConfig& config = {});

/// Bisection over tau for the residual constraint; returns the feasible
/// iterate with the smallest nuclear norm.
SolverReport solve_lasso(const MeasurementEnsemble& A, const Vector& y, double delta, const SolverConfig& config = {});
SolverReport solve_lasso(const ObservationSet& omega, const Vector& y, double delta, const SolverConfig& config = {});

/// Noise level for the Lasso constraint under iid N(0, sigma^2) noise:
/// sqrt(m + sqrt(8 m)) sigma.
double lasso_delta(Index m, double sigma);

} // namespace lrr
