#include "lrr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "lrr/oracle.hpp"
#include "lrr/random.hpp"

namespace lrr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median(std::vector<double> v)
{
  if (v.empty())
    return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

LowRankSpec truth_spec(const ExperimentConfig& cfg, const CellParams& c, std::uint64_t seed)
{
  LowRankSpec s;
  s.n1 = s.n2 = c.n;
  s.r = c.r;
  s.seed = seed;
  if (cfg.spectrum == "geometric") {
    s.spectrum = GeometricSpectrum{cfg.spectrum_scale, cfg.spectrum_ratio};
  } else if (c.kappa == 1.0 || c.r == 1) {
    s.spectrum = EqualSpectrum{cfg.spectrum_scale};
  } else {
    // log-linear from scale * kappa down to scale
    std::vector<double> v(static_cast<std::size_t>(c.r));
    for (Index i = 0; i < c.r; ++i)
      v[static_cast<std::size_t>(i)] =
          cfg.spectrum_scale * std::pow(c.kappa, static_cast<double>(c.r - 1 - i) / static_cast<double>(c.r - 1));
    s.spectrum = ExplicitSpectrum{std::move(v)};
  }
  return s;
}

MeasurementEnsemble build_ensemble(EnsembleKind kind, const CellParams& c, std::uint64_t seed)
{
  switch (kind) {
  case EnsembleKind::gaussian:
    return MeasurementEnsemble::gaussian(c.n, c.n, c.m, seed);
  case EnsembleKind::rademacher:
    return MeasurementEnsemble::rademacher(c.n, c.n, c.m, seed);
  case EnsembleKind::entry_sampling:
    return MeasurementEnsemble::entry_sampling(sample_omega(c.n, c.n, c.m, seed));
  case EnsembleKind::vectorization:
    return MeasurementEnsemble::vectorization(c.n, c.n);
  }
  throw std::logic_error("unhandled ensemble kind");
}

void set_errors(TrialRecord& rec, const Matrix& estimate, const Matrix& truth)
{
  rec.sq_err = (estimate - truth).squaredNorm();
  const double tn = truth.norm();
  rec.rel_err = tn > 0.0 ? std::sqrt(rec.sq_err) / tn : std::sqrt(rec.sq_err);
}

TrialOutcome converged_outcome(bool converged, bool ok)
{
  if (!converged)
    return TrialOutcome::nonconverged;
  return ok ? TrialOutcome::success : TrialOutcome::failure;
}

bool nonincreasing(const std::vector<double>& trace)
{
  for (std::size_t k = 1; k < trace.size(); ++k)
    if (trace[k] > trace[k - 1])
      return false;
  return true;
}

void run_trial_body(const ExperimentConfig& cfg, const CellParams& c, TrialRecord& rec)
{
  const std::uint64_t truth_seed = derive_seed(rec.seed, {1});
  const std::uint64_t ens_seed = derive_seed(rec.seed, {2});
  const std::uint64_t noise_seed = derive_seed(rec.seed, {3});

  const LowRankSpec spec = truth_spec(cfg, c, truth_seed);
  const Matrix M = gen_low_rank(spec).matrix;
  const std::vector<double> spectrum = spec.singular_values();
  const MeasurementEnsemble A = build_ensemble(cfg.ensemble, c, ens_seed);
  const Vector clean = A.apply(M);
  const Vector y = add_noise(clean, {c.sigma, noise_seed});
  const double nd = static_cast<double>(c.n);

  switch (cfg.experiment) {
  case Experiment::phase_transition: {
    const SolverReport rep = solve_noiseless(A, y, cfg.solver);
    set_errors(rec, rep.estimate, M);
    rec.iterations = rep.iterations;
    rec.formula = static_cast<double>((2 * c.n - c.r) * c.r);
    rec.ratio = static_cast<double>(c.m) / rec.formula;
    rec.outcome = converged_outcome(rep.converged, rec.rel_err <= cfg.success_threshold);
    rec.message = rep.message;
    break;
  }
  case Experiment::dantzig_scaling:
  case Experiment::bias_variance:
  case Experiment::instance_optimal: {
    const double lambda = choose_lambda(c.n, c.sigma, cfg.c_mult);
    const SolverReport rep = solve_dantzig(A, y, lambda, cfg.solver);
    set_errors(rec, rep.estimate, M);
    rec.iterations = rep.iterations;
    rec.extra["lambda"] = lambda;
    rec.extra["truth_feasible"] = operator_norm(A.adjoint(y - clean)) <= lambda ? 1.0 : 0.0;
    rec.extra["dual_residual"] = rep.dual_residual;
    if (cfg.experiment == Experiment::dantzig_scaling) {
      rec.formula = nd * static_cast<double>(c.r) * c.sigma * c.sigma;
    } else if (cfg.experiment == Experiment::bias_variance) {
      rec.formula = ideal_risk(spectrum, c.n, c.sigma);
    } else {
      const Index rbar = std::min<Index>(rbar_heuristic(c.n, c.m), static_cast<Index>(spectrum.size()));
      rec.extra["r_bar"] = static_cast<double>(rbar);
      rec.formula = instance_optimal_bound(spectrum, c.n, c.sigma, rbar).value;
    }
    rec.ratio = rec.formula > 0.0 ? rec.sq_err / rec.formula : 0.0;
    rec.outcome = converged_outcome(rep.converged, std::isfinite(rec.sq_err));
    rec.message = rep.message;
    break;
  }
  case Experiment::completion_stability: {
    const double delta = lasso_delta(c.m, c.sigma);
    const SolverReport rep = solve_lasso(A.omega(), y, delta, cfg.solver);
    set_errors(rec, rep.estimate, M);
    rec.iterations = rep.iterations;
    const double err = std::sqrt(rec.sq_err);
    rec.extra["delta"] = delta;
    rec.extra["abs_err"] = err;
    rec.extra["truth_feasible"] = (y - clean).norm() <= delta ? 1.0 : 0.0;
    rec.formula = completion_stability_bound(c.n, c.p, delta).value;
    rec.ratio = rec.formula > 0.0 ? err / rec.formula : 0.0;
    rec.outcome = converged_outcome(rep.converged, err <= rec.formula);
    rec.message = rep.message;
    break;
  }
  case Experiment::optspace_compare: {
    const ObservationSet& omega = A.omega();
    const Matrix Y_obs = A.adjoint(y); // P_Omega(M + Z)
    const OptspaceRun run = optspace_run(Y_obs, omega, c.r, cfg.optspace);
    set_errors(rec, run.report.estimate, M);
    rec.iterations = run.report.iterations;
    const double err = std::sqrt(rec.sq_err);
    rec.extra["abs_err"] = err;
    rec.extra["objective_monotone"] = nonincreasing(run.state.objective_trace) ? 1.0 : 0.0;
    rec.extra["accepted_steps"] = static_cast<double>(run.state.iteration);
    const double noise_op = operator_norm(project_omega(omega, Y_obs - M));
    rec.extra["noise_opnorm"] = noise_op;
    const double kappa_real = spectrum.front() / spectrum.back();
    rec.formula = optspace_noisy_bound(c.n, static_cast<double>(c.m), c.r, kappa_real, noise_op).value;
    rec.ratio = rec.formula > 0.0 ? err / rec.formula : 0.0;
    if (cfg.baseline) {
      const SolverReport base = c.sigma > 0.0 ? solve_lasso(omega, y, lasso_delta(c.m, c.sigma), cfg.solver)
                                              : solve_noiseless(A, y, cfg.solver);
      const double tn = M.norm();
      rec.extra["nuclear_rel_err"] = (base.estimate - M).norm() / tn;
      rec.extra["nuclear_converged"] = base.converged ? 1.0 : 0.0;
      rec.extra["nuclear_iterations"] = static_cast<double>(base.iterations);
    }
    rec.outcome = converged_outcome(run.report.converged, rec.rel_err <= cfg.success_threshold);
    rec.message = run.report.message;
    break;
  }
  }
}

} // namespace

std::string to_string(TrialOutcome o)
{
  switch (o) {
  case TrialOutcome::success:
    return "success";
  case TrialOutcome::failure:
    return "failure";
  case TrialOutcome::nonconverged:
    return "nonconverged";
  }
  return "unknown";
}

bool ExperimentResult::accepted() const
{
  return std::all_of(acceptance.begin(), acceptance.end(), [](const AcceptanceCheck& c) { return c.passed; });
}

std::vector<CellParams> expand_grid(const ExperimentConfig& cfg)
{
  std::vector<std::pair<Index, Index>> nr = cfg.grid.cells;
  if (nr.empty()) {
    for (Index n : cfg.grid.n) {
      if (cfg.grid.r.empty())
        nr.emplace_back(n, n);
      for (Index r : cfg.grid.r)
        nr.emplace_back(n, r);
    }
  }
  std::vector<double> sizes = cfg.grid.size;
  const bool vec = cfg.ensemble == EnsembleKind::vectorization;
  if (vec)
    sizes = {0.0};

  std::vector<CellParams> out;
  for (const auto& [n, r] : nr) {
    if (r < 1 || r > n)
      throw std::invalid_argument("grid: need 1 <= r <= n, got n = " + std::to_string(n) + ", r = " +
                                  std::to_string(r));
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    for (double s : sizes) {
      Index m = 0;
      if (vec)
        m = n * n;
      else if (cfg.grid.size_kind == SampleSize::absolute)
        m = static_cast<Index>(std::llround(s));
      else if (cfg.grid.size_kind == SampleSize::factor)
        m = static_cast<Index>(std::llround(s * static_cast<double>(n * r)));
      else
        m = static_cast<Index>(std::llround(s * n2));
      if (m < 1)
        throw std::invalid_argument("grid: sample size rounds to m = 0");
      if (cfg.ensemble == EnsembleKind::entry_sampling && m > n * n)
        throw std::invalid_argument("grid: entry sampling needs m <= n^2, got m = " + std::to_string(m));
      for (double sigma : cfg.grid.sigma)
        for (double kappa : cfg.grid.kappa)
          out.push_back({n, r, m, static_cast<double>(m) / n2, sigma, kappa});
    }
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t master, Index cell, int trial)
{
  return derive_seed(master, {static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(trial)});
}

TrialRecord run_trial(const ExperimentConfig& cfg, const CellParams& cell, Index cell_index, int trial)
{
  TrialRecord rec;
  rec.cell = cell_index;
  rec.trial = trial;
  rec.seed = trial_seed(cfg.seed, cell_index, trial);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    run_trial_body(cfg, cell, rec);
  } catch (const std::exception& e) {
    rec.outcome = TrialOutcome::failure;
    rec.rel_err = rec.sq_err = kInf;
    rec.ratio = kInf;
    rec.message = std::string("error: ") + e.what();
  }
  if (cfg.record_timing)
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

ExperimentResult run_experiment(ExperimentConfig cfg, int jobs)
{
  cfg.validate();
  if (jobs < 1)
    throw std::invalid_argument("run_experiment: jobs must be >= 1");
  const std::vector<CellParams> cells = expand_grid(cfg);
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t total = cells.size() * trials;
  std::vector<TrialRecord> records(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    try {
      for (std::size_t k = next++; k < total; k = next++)
        records[k] = run_trial(cfg, cells[k / trials], static_cast<Index>(k / trials), static_cast<int>(k % trials));
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure)
        failure = std::current_exception();
      next = total;
    }
  };
  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(total, 1));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t)
      pool.emplace_back(worker);
    for (auto& t : pool)
      t.join();
  }
  if (failure)
    std::rethrow_exception(failure);

  ExperimentResult result;
  result.config = cfg;
  result.version = LRR_VERSION;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    CellResult cr;
    cr.params = cells[ci];
    cr.trials = cfg.trials;
    std::vector<double> rel, sq, measured, formula, ratio;
    for (std::size_t t = 0; t < trials; ++t) {
      TrialRecord& rec = records[ci * trials + t];
      switch (rec.outcome) {
      case TrialOutcome::success:
        ++cr.successes;
        break;
      case TrialOutcome::failure:
        ++cr.failures;
        break;
      case TrialOutcome::nonconverged:
        ++cr.nonconverged;
        break;
      }
      rel.push_back(rec.rel_err);
      sq.push_back(rec.sq_err);
      const bool abs_metric =
          cfg.experiment == Experiment::completion_stability || cfg.experiment == Experiment::optspace_compare;
      measured.push_back(abs_metric ? std::sqrt(rec.sq_err) : rec.sq_err);
      formula.push_back(rec.formula);
      ratio.push_back(rec.ratio);
      cr.seconds += rec.seconds;
      cr.records.push_back(std::move(rec));
    }
    cr.success_rate = static_cast<double>(cr.successes) / static_cast<double>(cr.trials);
    cr.median_rel_err = median(rel);
    cr.max_rel_err = *std::max_element(rel.begin(), rel.end());
    cr.median_sq_err = median(sq);
    cr.median_measured = median(measured);
    cr.median_formula = median(formula);
    cr.fitted_constant = median(ratio);
    result.cells.push_back(std::move(cr));
  }
  result.acceptance = evaluate_acceptance(result);
  return result;
}

std::optional<std::string> formula_id(Experiment e)
{
  switch (e) {
  case Experiment::phase_transition:
    return std::nullopt;
  case Experiment::dantzig_scaling:
    return "nr_sigma2";
  case Experiment::bias_variance:
    return "ideal_risk";
  case Experiment::instance_optimal:
    return "instance_bound";
  case Experiment::completion_stability:
    return "stability_bound";
  case Experiment::optspace_compare:
    return "optspace_bound";
  }
  return std::nullopt;
}

ConstantFit fit_empirical_constant(const std::vector<double>& measured, const std::vector<double>& formula)
{
  if (measured.size() != formula.size())
    throw std::invalid_argument("fit_empirical_constant: length mismatch");
  if (measured.size() < 3)
    throw std::invalid_argument("fit_empirical_constant: need at least 3 cells, got " +
                                std::to_string(measured.size()));
  double ff = 0.0;
  double fv = 0.0;
  ConstantFit fit;
  fit.cells = static_cast<Index>(measured.size());
  fit.min_ratio = kInf;
  fit.max_ratio = -kInf;
  for (std::size_t k = 0; k < measured.size(); ++k) {
    const double f = formula[k];
    const double v = measured[k];
    if (!std::isfinite(f) || !std::isfinite(v) || f < 0.0)
      throw std::invalid_argument("fit_empirical_constant: values must be finite and formula nonnegative");
    ff += f * f;
    fv += f * v;
    if (f > 0.0) {
      fit.min_ratio = std::min(fit.min_ratio, v / f);
      fit.max_ratio = std::max(fit.max_ratio, v / f);
    }
  }
  if (!(ff > 0.0))
    throw std::invalid_argument("fit_empirical_constant: formula is zero in every cell");
  fit.slope = fv / ff;
  return fit;
}

ConstantFit fit_empirical_constant(const ExperimentResult& result, const std::string& id)
{
  const auto own = formula_id(result.config.experiment);
  if (!own || *own != id)
    throw std::invalid_argument("fit_empirical_constant: formula '" + id + "' does not apply to " +
                                to_string(result.config.experiment));
  std::vector<double> measured, formula;
  for (const auto& c : result.cells) {
    measured.push_back(c.median_measured);
    formula.push_back(c.median_formula);
  }
  return fit_empirical_constant(measured, formula);
}

std::vector<AcceptanceCheck> evaluate_acceptance(const ExperimentResult& result)
{
  const AcceptanceFloors& a = result.config.acceptance;
  std::vector<AcceptanceCheck> out;
  const auto& cells = result.cells;

  if (a.min_success_rate) {
    double worst = 1.0;
    for (const auto& c : cells)
      worst = std::min(worst, c.success_rate);
    out.push_back({"min_success_rate", worst >= *a.min_success_rate,
                   "lowest cell success rate " + fmt(worst) + ", floor " + fmt(*a.min_success_rate)});
  }
  if (a.max_constant_spread || a.constant_min || a.constant_max) {
    double lo = kInf, hi = -kInf;
    for (const auto& c : cells) {
      lo = std::min(lo, c.fitted_constant);
      hi = std::max(hi, c.fitted_constant);
    }
    if (a.max_constant_spread) {
      const double spread = lo > 0.0 && std::isfinite(hi) ? hi / lo : kInf;
      out.push_back({"max_constant_spread", spread <= *a.max_constant_spread,
                     "constants in [" + fmt(lo) + ", " + fmt(hi) + "], spread " + fmt(spread) + ", limit " +
                         fmt(*a.max_constant_spread)});
    }
    if (a.constant_min)
      out.push_back({"constant_min", lo >= *a.constant_min, "smallest constant " + fmt(lo) + ", floor " + fmt(*a.constant_min)});
    if (a.constant_max)
      out.push_back({"constant_max", hi <= *a.constant_max, "largest constant " + fmt(hi) + ", limit " + fmt(*a.constant_max)});
  }
  if (a.crossing_factor) {
    std::map<std::pair<Index, Index>, bool> crossed;
    for (const auto& c : cells) {
      bool& hit = crossed[{c.params.n, c.params.r}];
      const double limit = *a.crossing_factor * static_cast<double>(c.params.n * c.params.r);
      hit = hit || (static_cast<double>(c.params.m) <= limit && c.success_rate >= 0.5);
    }
    bool all = !crossed.empty();
    std::string detail;
    for (const auto& [nr, hit] : crossed) {
      all = all && hit;
      detail += (detail.empty() ? "" : "; ") + std::string("n=") + std::to_string(nr.first) + " r=" +
                std::to_string(nr.second) + (hit ? " crosses" : " does not cross");
    }
    out.push_back({"crossing_factor", all, detail + " (0.5 at m <= " + fmt(*a.crossing_factor) + " n r)"});
  }
  if (a.min_error_ratio) {
    // Pair each kappa = max cell with the kappa = 1 cell sharing (n, r, m, sigma).
    double kmax = 1.0;
    for (const auto& c : cells)
      kmax = std::max(kmax, c.params.kappa);
    bool ok = kmax > 1.0;
    double worst = kInf;
    for (const auto& hi : cells) {
      if (hi.params.kappa != kmax)
        continue;
      bool paired = false;
      for (const auto& lo : cells) {
        if (lo.params.kappa != 1.0 || lo.params.n != hi.params.n || lo.params.r != hi.params.r ||
            lo.params.m != hi.params.m || lo.params.sigma != hi.params.sigma)
          continue;
        paired = true;
        const double ratio = lo.median_measured > 0.0 ? hi.median_measured / lo.median_measured : kInf;
        worst = std::min(worst, ratio);
      }
      ok = ok && paired;
    }
    ok = ok && worst >= *a.min_error_ratio;
    out.push_back({"min_error_ratio", ok,
                   "median error ratio kappa=" + fmt(kmax) + " over kappa=1: " + fmt(worst) + ", floor " +
                       fmt(*a.min_error_ratio)});
  }
  if (a.max_baseline_error) {
    double worst = 0.0;
    bool present = true;
    for (const auto& c : cells) {
      std::vector<double> v;
      for (const auto& rec : c.records) {
        const auto it = rec.extra.find("nuclear_rel_err");
        if (it == rec.extra.end())
          present = false;
        else
          v.push_back(it->second);
      }
      worst = std::max(worst, median(v));
    }
    out.push_back({"max_baseline_error", present && worst <= *a.max_baseline_error,
                   present ? "largest median nuclear-norm relative error " + fmt(worst) + ", limit " +
                                 fmt(*a.max_baseline_error)
                           : "baseline was not run"});
  }
  return out;
}

} // namespace lrr
