#pragma once
//
// Seeded Monte Carlo experiment harness. A config names one experiment and a
// parameter grid; every (cell, trial) pair gets its own derived seed, so the
// numbers do not depend on the number of worker threads.
//

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lrr/measure.hpp"
#include "lrr/optspace.hpp"
#include "lrr/solve.hpp"

namespace lrr {

enum class Experiment {
  phase_transition,
  dantzig_scaling,
  bias_variance,
  instance_optimal,
  completion_stability,
  optspace_compare
};

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

enum class SampleSize { absolute, factor, fraction }; // m, m_factor * n r, p * n^2

struct Grid {
  std::vector<std::pair<Index, Index>> cells; // explicit (n, r) pairs; overrides n x r
  std::vector<Index> n;
  std::vector<Index> r; // empty: full rank
  SampleSize size_kind = SampleSize::factor;
  std::vector<double> size; // values of m, m_factor or p
  std::vector<double> sigma{0.0};
  std::vector<double> kappa{1.0};
};

struct AcceptanceFloors {
  std::optional<double> min_success_rate;    // every cell
  std::optional<double> max_constant_spread; // max/min of per-cell constants
  std::optional<double> constant_min;        // every cell's constant >= this
  std::optional<double> constant_max;        // every cell's constant <= this
  std::optional<double> crossing_factor;     // success rate reaches 0.5 at some m <= factor n r
  std::optional<double> min_error_ratio;     // optspace-compare: median error, largest kappa over kappa = 1
  std::optional<double> max_baseline_error;  // optspace-compare: nuclear-norm median relative error

  bool any() const;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::phase_transition;
  std::string name;
  Grid grid;
  int trials = 20;
  std::uint64_t seed = 0;
  double success_threshold = 1e-3;
  EnsembleKind ensemble = EnsembleKind::gaussian;
  bool ensemble_set = false;
  std::string spectrum; // equal | geometric; empty picks the experiment default
  double spectrum_scale = 1.0;
  double spectrum_ratio = 0.8;
  double c_mult = 1.1;
  bool record_timing = false;
  bool baseline = true; // optspace-compare: also run the nuclear-norm program
  SolverConfig solver;
  OptspaceConfig optspace;
  AcceptanceFloors acceptance;

  /// Fills experiment-specific defaults and checks the grid.
  void validate();
};

/// `key = value` lines, `[grid]`, `[solver]`, `[optspace]`, `[acceptance]`
/// sections, `#` comments. Lists are comma separated.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

struct CellParams {
  Index n = 0;
  Index r = 0;
  Index m = 0;
  double p = 0.0; // m / n^2
  double sigma = 0.0;
  double kappa = 1.0;
};

enum class TrialOutcome { success, failure, nonconverged };
std::string to_string(TrialOutcome o);

struct TrialRecord {
  Index cell = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  TrialOutcome outcome = TrialOutcome::failure;
  double rel_err = 0.0;
  double sq_err = 0.0;
  double formula = 0.0; // the experiment's theoretical reference value
  double ratio = 0.0;   // measured / formula
  int iterations = 0;
  double seconds = 0.0;
  std::map<std::string, double> extra;
  std::string message;
};

struct CellResult {
  CellParams params;
  int trials = 0;
  int successes = 0;
  int failures = 0;
  int nonconverged = 0;
  double success_rate = 0.0;
  double median_rel_err = 0.0;
  double max_rel_err = 0.0;
  double median_sq_err = 0.0;
  double median_measured = 0.0; // quantity compared against the formula
  double median_formula = 0.0;
  double fitted_constant = 0.0; // median per-trial ratio
  double seconds = 0.0;
  std::vector<TrialRecord> records;
};

struct AcceptanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConstantFit {
  double slope = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  Index cells = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string version;
  std::vector<CellResult> cells;
  std::vector<AcceptanceCheck> acceptance;

  bool accepted() const;
};

/// Cells in grid order: (n, r) outer, then sample size, sigma, kappa.
std::vector<CellParams> expand_grid(const ExperimentConfig& config);

/// Per-trial seed: derive_seed(master, {cell, trial}).
std::uint64_t trial_seed(std::uint64_t master, Index cell, int trial);

TrialRecord run_trial(const ExperimentConfig& config, const CellParams& cell, Index cell_index, int trial);

/// jobs >= 1 worker threads; results merged by (cell, trial).
ExperimentResult run_experiment(ExperimentConfig config, int jobs = 1);

/// Formula id of an experiment: "nr_sigma2", "ideal_risk", "instance_bound",
/// "stability_bound" or "optspace_bound". Phase transition has none.
std::optional<std::string> formula_id(Experiment e);

/// Least-squares slope through the origin of measured against formula.
ConstantFit fit_empirical_constant(const std::vector<double>& measured, const std::vector<double>& formula);
ConstantFit fit_empirical_constant(const ExperimentResult& result, const std::string& formula_id);

std::vector<AcceptanceCheck> evaluate_acceptance(const ExperimentResult& result);

enum class EmitFormat { csv, json, both };
EmitFormat parse_emit_format(const std::string& s);

void write_csv(std::ostream& os, const ExperimentResult& result);
void write_json(std::ostream& os, const ExperimentResult& result);
void write_svg(std::ostream& os, const ExperimentResult& result);

/// Writes <stem>.csv / <stem>.json (and <stem>.svg if plot) into dir; returns
/// the paths written. Throws std::runtime_error on an unwritable path.
std::vector<std::string> emit(const ExperimentResult& result, const std::string& dir, EmitFormat format,
                              bool plot = false);

} // namespace lrr
