#pragma once
//
// Coherence parameters, condition number, empirical RIP and concentration
// probing, and the completion-requirement advisor.
//

#include <cstdint>
#include <string>
#include <vector>

#include "lrr/matcore.hpp"
#include "lrr/measure.hpp"

namespace lrr {

struct CoherenceReport {
  double mu_B = 0.0;
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu_strong = 0.0;
  double mu2 = 0.0;
  double kappa = 0.0; // +inf when sigma_r == 0
  Index r = 0;
  Index n1 = 0;
  Index n2 = 0;
};

/// Coherence of the leading r singular triplets (r = numerical rank of the
/// factors by default). For rectangular shapes the left-side quantities use
/// n1, the right-side ones n2, and the mixed ones (mu1, mu2) sqrt(n1 n2).
CoherenceReport coherence(const SvdFactors& factors);
CoherenceReport coherence(const SvdFactors& factors, Index r);

struct RipEstimate {
  Index r = 0;
  double delta_hat = 0.0; // certified lower bound on delta_r
  Index probes = 0;       // total probe matrices evaluated
  std::uint64_t seed = 0;
};

/// delta_hat = max |‖A(X)‖² − ‖X‖²| / ‖X‖² over: `probes` random matrices of
/// each rank 1..r (so rank-r probes contain the rank-(r−1) ones) plus every
/// e_i e_j^T when n1 n2 <= 1e4.
RipEstimate rip_probe(const MeasurementEnsemble& A, Index r, Index probes, std::uint64_t seed);

/// Fraction of `trials` fresh ensembles (seeded per trial) for which
/// |‖A(X)‖² − 1| > t, X a fixed unit-Frobenius n x n matrix.
double concentration_probe(EnsembleKind kind, Index n, Index m, double t, Index trials, std::uint64_t seed);

/// 2 exp(−(m/2)(t²/2 − t³/3)): chi-square tail bound for the Gaussian ensemble.
double chi_square_tail_bound(Index m, double t);

struct AdvisorRow {
  std::string source;      // e.g. "nuclear norm, generic model, r <= n^(1/5)"
  std::string requirement; // formula text with C = 1
  double required = 0.0;   // min(formula, n1 n2)
  bool applicable = true;  // the row's side condition on r
  double ratio = 0.0;      // m / required
  bool satisfied = false;  // ratio >= 1, up to the unknown constant
};

/// Ratio of m to each completion requirement, every unknown constant set to 1.
/// Requirements are capped at n1 n2, since observing every entry determines M.
std::vector<AdvisorRow> theory_advisor(const CoherenceReport& report, Index n, Index r, double m);

} // namespace lrr
