#pragma once
//
// OPTSPACE for matrix completion: trim over-sampled rows/columns, take the
// rescaled rank-r spectral projection, then descend on
//   F(U, V) = min_S ½‖P_Omega(U S V^T − Y)‖²_F
// over orthonormal U, V with QR retraction and Armijo backtracking.
//

#include <optional>
#include <vector>

#include "lrr/matcore.hpp"
#include "lrr/measure.hpp"
#include "lrr/solve.hpp"

namespace lrr {

struct OptspaceConfig {
  int max_iters = 500;
  double grad_tol = 1e-8; // Frobenius norm of the Riemannian gradient
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  double trim_multiplier = 2.0;

  void validate() const;
};

struct OptspaceState {
  Matrix U; // n1 x r, orthonormal
  Matrix V; // n2 x r, orthonormal
  Matrix S; // r x r
  double objective = 0.0;
  int iteration = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool ridge_used = false; // inner least squares needed regularization
  std::vector<double> objective_trace; // F after each accepted step, starting point first

  Matrix estimate() const { return U * S * V.transpose(); }
};

struct TrimResult {
  Matrix trimmed;
  ObservationSet omega;
};

/// Zero every row whose degree exceeds multiplier * |Omega| / n1 and every
/// column whose degree exceeds multiplier * |Omega| / n2, repeating with the
/// reduced set until nothing changes.
TrimResult trim(const Matrix& Y_obs, const ObservationSet& omega, double multiplier = 2.0);

/// Rank-r SVD of trimmed / p, p = |omega_trimmed| / (n1 n2).
OptspaceState spectral_init(const Matrix& trimmed, const ObservationSet& omega_trimmed, Index r);

/// Largest consecutive gap ratio sigma_i / sigma_{i+1} of trimmed / p; a
/// singular value under the rank tolerance counts as an infinite gap.
Index estimate_rank(const Matrix& trimmed, double p);

/// Exact inner least squares for S given U, V. Sets `ridge_used` when the
/// normal equations needed a 1e-12 ridge.
Matrix optimal_middle(const Matrix& U, const Matrix& V, const Matrix& Y_obs, const ObservationSet& omega,
                      bool* ridge_used = nullptr);

/// ½‖P_Omega(U S V^T − Y)‖²_F.
double factored_objective(const Matrix& U, const Matrix& S, const Matrix& V, const Matrix& Y_obs,
                          const ObservationSet& omega);

OptspaceState optspace_descent(OptspaceState state, const Matrix& Y_obs, const ObservationSet& omega,
                               const OptspaceConfig& config = {});

struct OptspaceRun {
  SolverReport report;
  OptspaceState state;
  Index rank = 0;
  ObservationSet trimmed_omega;
};

/// trim -> (estimate_rank) -> spectral_init -> optspace_descent. The
/// report's residuals refer to the entry-sampling operator on `omega`.
OptspaceRun optspace_run(const Matrix& Y_obs, const ObservationSet& omega, std::optional<Index> rank,
                         const OptspaceConfig& config = {});
SolverReport optspace(const Matrix& Y_obs, const ObservationSet& omega, std::optional<Index> rank,
                      const OptspaceConfig& config = {});

} // namespace lrr
