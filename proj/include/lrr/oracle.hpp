#pragma once
//
// Oracle estimator with a given column space, and the error-bound formulas
// used to judge estimators. Unknown theorem constants are fixed to 1; every
// BoundReport says so through `up_to_constants`.
//

#include <map>
#include <string>
#include <vector>

#include "lrr/matcore.hpp"
#include "lrr/measure.hpp"

namespace lrr {

struct BoundReport {
  std::string name;
  double value = 0.0;
  bool up_to_constants = true;
  std::map<std::string, double> inputs;
};

struct OracleFit {
  Matrix estimate; // U R*
  Matrix R;        // r x n2
  bool rank_deficient = false;
};

/// argmin_R ‖y − A(U R)‖_2 (minimum-norm R if the restricted operator is
/// rank deficient).
OracleFit oracle_fit(const Matrix& U, const MeasurementEnsemble& A, const Vector& y);

/// ½ sum_i min(sigma_i², n sigma²).
double ideal_risk(const std::vector<double>& spectrum, Index n, double noise_sigma);

/// min over r of [sum_{i>r} sigma_i² + n r sigma²] (exhaustive scan, r = 0..k).
double oracle_scan(const std::vector<double>& spectrum, Index n, double noise_sigma);

/// n r sigma² / (1 + delta_r).
BoundReport minimax_bound(Index n, Index r, double noise_sigma, double delta_r);

/// sum_{i<=r̄} min(sigma_i², n sigma²) + sum_{i>r̄} sigma_i².
BoundReport instance_optimal_bound(const std::vector<double>& spectrum, Index n, double noise_sigma, Index r_bar);

/// 4 sqrt((2 + p) n / p) delta + 2 delta.
BoundReport completion_stability_bound(Index n, double p, double delta);

/// kappa² (n² sqrt(r) / m) ‖P_Omega(Z)‖.
BoundReport optspace_noisy_bound(Index n, double m, Index r, double kappa, double noise_opnorm);

/// Gaussian-noise estimate of ‖P_Omega(Z)‖: sqrt(m log n / n) sigma.
double gaussian_noise_opnorm(Index n, double m, double noise_sigma);

/// max(1, floor(c m / n)): heuristic stand-in for the largest RIP rank.
Index rbar_heuristic(Index n, Index m, double c = 0.1);

} // namespace lrr
