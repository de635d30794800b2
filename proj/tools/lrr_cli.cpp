// lrr: command-line front end for the low-rank recovery library.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrr/bench.hpp"
#include "lrr/diagnostics.hpp"
#include "lrr/matcore.hpp"
#include "lrr/measure.hpp"
#include "lrr/optspace.hpp"
#include "lrr/oracle.hpp"
#include "lrr/random.hpp"
#include "lrr/serialize.hpp"
#include "lrr/solve.hpp"

using namespace lrr;
using nlohmann::json;

namespace {

void write_json_file(const std::string& path, const json& j)
{
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void print_report_summary(const SolverReport& r, const std::optional<Matrix>& truth)
{
  std::printf("converged %s after %d iterations\n", r.converged ? "yes" : "no", r.iterations);
  std::printf("nuclear norm        %.10g\n", r.objective);
  std::printf("residual ||A(X)-y|| %.6g\n", r.equality_residual);
  std::printf("dual ||A*(y-A(X))|| %.6g\n", r.dual_residual);
  if (truth) {
    const double tn = truth->norm();
    std::printf("relative error      %.6g\n", tn > 0 ? (r.estimate - *truth).norm() / tn : (r.estimate - *truth).norm());
  }
  if (!r.message.empty())
    std::printf("note: %s\n", r.message.c_str());
}

std::vector<double> parse_doubles(const std::string& s)
{
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t pos = 0;
    out.push_back(std::stod(item, &pos));
    if (pos != item.size())
      throw std::invalid_argument("bad number '" + item + "'");
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return out;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Low-rank matrix recovery: nuclear-norm programs, OPTSPACE, diagnostics and experiments"};
  app.set_version_flag("--version", std::string(LRR_VERSION));
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a random low-rank matrix (and optionally a sampling set)");
  Index g_n1 = 0, g_n2 = 0, g_r = 1, g_omega_m = 0;
  std::string g_spectrum = "equal", g_out, g_omega_out;
  double g_scale = 1.0, g_ratio = 0.5;
  std::uint64_t g_seed = 0;
  gen->add_option("--n1", g_n1, "rows")->required();
  gen->add_option("--n2", g_n2, "columns (default n1)");
  gen->add_option("--rank", g_r, "rank");
  gen->add_option("--spectrum", g_spectrum, "equal | geometric")->check(CLI::IsMember({"equal", "geometric"}));
  gen->add_option("--scale", g_scale, "singular value (equal) or top value (geometric)");
  gen->add_option("--ratio", g_ratio, "geometric ratio");
  gen->add_option("--seed", g_seed, "seed");
  gen->add_option("--out", g_out, "output .lrm file")->required();
  gen->add_option("--omega-m", g_omega_m, "also sample this many observed entries");
  gen->add_option("--omega-out", g_omega_out, "output .omega file");

  // solve
  auto* solve = app.add_subcommand("solve", "Nuclear-norm recovery from linear measurements of a matrix");
  std::string s_program = "noiseless", s_matrix, s_omega, s_out, s_ensemble = "gaussian", s_estimate;
  std::optional<double> s_lambda, s_delta;
  double s_sigma = 0.0, s_cmult = 1.1;
  std::uint64_t s_seed = 0;
  Index s_m = 0;
  SolverConfig s_cfg;
  solve->add_option("--program", s_program, "noiseless | dantzig | lasso")
      ->check(CLI::IsMember({"noiseless", "dantzig", "lasso"}));
  solve->add_option("--matrix", s_matrix, "ground-truth matrix (.lrm) to measure")->required();
  solve->add_option("--omega", s_omega, "observed entries (.omega); selects entry sampling");
  solve->add_option("--ensemble", s_ensemble, "gaussian | rademacher | vectorization (without --omega)");
  solve->add_option("--m", s_m, "number of measurements for random ensembles");
  solve->add_option("--lambda", s_lambda, "Dantzig bound (default c sqrt(2n) sigma)");
  solve->add_option("--c-mult", s_cmult, "c in the default lambda");
  solve->add_option("--delta", s_delta, "Lasso radius (default sqrt(m + sqrt(8m)) sigma)");
  solve->add_option("--sigma", s_sigma, "noise standard deviation");
  solve->add_option("--seed", s_seed, "seed for the ensemble and the noise");
  solve->add_option("--max-iters", s_cfg.max_iters, "iteration budget");
  solve->add_option("--out", s_out, "report JSON (default stdout summary only)");
  solve->add_option("--estimate-out", s_estimate, "estimate as .lrm");

  // optspace
  auto* opt = app.add_subcommand("optspace", "OPTSPACE matrix completion");
  std::string o_matrix, o_omega, o_out, o_estimate;
  std::optional<Index> o_rank;
  double o_sigma = 0.0;
  std::uint64_t o_seed = 0;
  OptspaceConfig o_cfg;
  opt->add_option("--matrix", o_matrix, "matrix (.lrm) whose entries on omega are observed")->required();
  opt->add_option("--omega", o_omega, "observed entries (.omega)")->required();
  opt->add_option("--rank", o_rank, "rank (default: largest singular-value gap)");
  opt->add_option("--trim-mult", o_cfg.trim_multiplier, "trimming threshold multiplier");
  opt->add_option("--max-iters", o_cfg.max_iters, "descent iteration cap");
  opt->add_option("--sigma", o_sigma, "noise added to the observed entries");
  opt->add_option("--seed", o_seed, "noise seed");
  opt->add_option("--out", o_out, "report JSON");
  opt->add_option("--estimate-out", o_estimate, "estimate as .lrm");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "Coherence, condition number and completion requirements");
  std::string d_matrix, d_format = "text", d_omega;
  std::optional<Index> d_rank;
  std::optional<double> d_m;
  diag->add_option("--matrix", d_matrix, "matrix (.lrm)")->required();
  diag->add_option("--rank", d_rank, "rank to analyse (default numerical rank)");
  diag->add_option("--m", d_m, "number of observed entries for the advisor");
  diag->add_option("--omega", d_omega, "take m from this sampling set");
  diag->add_option("--format", d_format, "text | json")->check(CLI::IsMember({"text", "json"}));

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Evaluate an error bound");
  std::string b_bound, b_format = "text", b_spectrum;
  Index b_n = 0, b_r = 1, b_rbar = 0;
  double b_sigma = 0.0, b_delta_r = 0.0, b_p = 1.0, b_delta = 0.0, b_m = 0.0, b_kappa = 1.0;
  std::optional<double> b_noise_op;
  bounds->add_option("--bound", b_bound, "minimax | ideal | instance | stable | optspace")
      ->required()
      ->check(CLI::IsMember({"minimax", "ideal", "instance", "stable", "optspace"}));
  bounds->add_option("--n", b_n, "dimension")->required();
  bounds->add_option("--r", b_r, "rank");
  bounds->add_option("--sigma", b_sigma, "noise standard deviation");
  bounds->add_option("--delta-r", b_delta_r, "RIP constant (minimax)");
  bounds->add_option("--spectrum", b_spectrum, "comma-separated singular values (ideal, instance)");
  bounds->add_option("--r-bar", b_rbar, "r-bar (instance; default max(1, floor(0.1 m / n)))");
  bounds->add_option("--p", b_p, "sampling fraction (stable)");
  bounds->add_option("--delta", b_delta, "noise radius (stable)");
  bounds->add_option("--m", b_m, "number of measurements (optspace, instance)");
  bounds->add_option("--kappa", b_kappa, "condition number (optspace)");
  bounds->add_option("--noise-opnorm", b_noise_op, "||P_Omega(Z)|| (optspace; default Gaussian estimate)");
  bounds->add_option("--format", b_format, "text | json")->check(CLI::IsMember({"text", "json"}));

  // bench
  auto* bench = app.add_subcommand("bench", "Run a Monte Carlo experiment");
  std::string e_config, e_out = "bench_out", e_format = "both";
  std::optional<std::uint64_t> e_seed;
  int e_jobs = 1;
  bool e_plot = false;
  bench->add_option("--config", e_config, "experiment config file")->required();
  bench->add_option("--out", e_out, "output directory");
  bench->add_option("--seed", e_seed, "master seed (overrides the config)");
  bench->add_option("--jobs", e_jobs, "worker threads")->check(CLI::PositiveNumber);
  bench->add_option("--format", e_format, "csv | json | both")->check(CLI::IsMember({"csv", "json", "both"}));
  bench->add_flag("--plot", e_plot, "also write an SVG plot");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      LowRankSpec spec;
      spec.n1 = g_n1;
      spec.n2 = g_n2 ? g_n2 : g_n1;
      spec.r = g_r;
      spec.seed = g_seed;
      if (g_spectrum == "geometric")
        spec.spectrum = GeometricSpectrum{g_scale, g_ratio};
      else
        spec.spectrum = EqualSpectrum{g_scale};
      save_lrm(g_out, gen_low_rank(spec).matrix);
      if (g_omega_m > 0) {
        if (g_omega_out.empty())
          throw std::invalid_argument("--omega-m needs --omega-out");
        save_omega(g_omega_out, sample_omega(spec.n1, spec.n2, g_omega_m, derive_seed(g_seed, {7})));
      }
      return 0;
    }

    if (solve->parsed()) {
      const Matrix M = load_lrm(s_matrix);
      const std::optional<Matrix> truth = M;
      std::optional<MeasurementEnsemble> A;
      if (!s_omega.empty()) {
        A = MeasurementEnsemble::entry_sampling(load_omega(s_omega));
      } else {
        const EnsembleKind kind = parse_ensemble_kind(s_ensemble);
        if (kind == EnsembleKind::vectorization)
          A = MeasurementEnsemble::vectorization(M.rows(), M.cols());
        else if (kind == EnsembleKind::entry_sampling)
          throw std::invalid_argument("entry sampling needs --omega");
        else {
          if (s_m < 1)
            throw std::invalid_argument("--m is required for random ensembles");
          A = kind == EnsembleKind::gaussian ? MeasurementEnsemble::gaussian(M.rows(), M.cols(), s_m, derive_seed(s_seed, {1}))
                                             : MeasurementEnsemble::rademacher(M.rows(), M.cols(), s_m, derive_seed(s_seed, {1}));
        }
      }
      const Vector y = add_noise(A->apply(M), {s_sigma, derive_seed(s_seed, {2})});
      SolverReport rep;
      if (s_program == "noiseless") {
        rep = solve_noiseless(*A, y, s_cfg);
      } else if (s_program == "dantzig") {
        const double lambda = s_lambda ? *s_lambda : choose_lambda(std::max(M.rows(), M.cols()), s_sigma, s_cmult);
        rep = solve_dantzig(*A, y, lambda, s_cfg);
      } else {
        const double delta = s_delta ? *s_delta : lasso_delta(A->size(), s_sigma);
        rep = A->kind() == EnsembleKind::entry_sampling ? solve_lasso(A->omega(), y, delta, s_cfg)
                                                        : solve_lasso(*A, y, delta, s_cfg);
      }
      print_report_summary(rep, truth);
      if (!s_out.empty())
        write_json_file(s_out, to_json(rep, true));
      if (!s_estimate.empty())
        save_lrm(s_estimate, rep.estimate);
      return 0;
    }

    if (opt->parsed()) {
      const Matrix M = load_lrm(o_matrix);
      const ObservationSet omega = load_omega(o_omega);
      const MeasurementEnsemble A = MeasurementEnsemble::entry_sampling(omega);
      const Vector y = add_noise(A.apply(M), {o_sigma, derive_seed(o_seed, {2})});
      const OptspaceRun run = optspace_run(A.adjoint(y), omega, o_rank, o_cfg);
      std::printf("rank %ld, %ld of %ld entries kept after trimming\n", static_cast<long>(run.rank),
                  static_cast<long>(run.trimmed_omega.size()), static_cast<long>(omega.size()));
      print_report_summary(run.report, M);
      if (!o_out.empty()) {
        json j = to_json(run.report, true);
        j["rank"] = run.rank;
        j["objective_trace"] = run.state.objective_trace;
        write_json_file(o_out, j);
      }
      if (!o_estimate.empty())
        save_lrm(o_estimate, run.report.estimate);
      return 0;
    }

    if (diag->parsed()) {
      const Matrix M = load_lrm(d_matrix);
      const SvdFactors f = svd(M);
      const CoherenceReport rep = d_rank ? coherence(f, *d_rank) : coherence(f);
      double m = static_cast<double>(M.size());
      if (!d_omega.empty())
        m = static_cast<double>(load_omega(d_omega).size());
      if (d_m)
        m = *d_m;
      const Index n = std::max(M.rows(), M.cols());
      const auto rows = theory_advisor(rep, n, rep.r, m);
      if (d_format == "json") {
        std::cout << json{{"coherence", to_json(rep)}, {"m", m}, {"advisor", to_json(rows)}}.dump(2) << '\n';
      } else {
        std::printf("%ld x %ld, rank %ld\n", static_cast<long>(rep.n1), static_cast<long>(rep.n2), static_cast<long>(rep.r));
        std::printf("  mu_B   %12.6g\n  mu0    %12.6g\n  mu1    %12.6g\n  mu     %12.6g\n  mu2    %12.6g\n  kappa  %12.6g\n",
                    rep.mu_B, rep.mu0, rep.mu1, rep.mu_strong, rep.mu2, rep.kappa);
        std::printf("\nrequirements at m = %.0f (constants set to 1)\n", m);
        std::printf("  %-52s %14s %10s  %s\n", "source", "required", "m/req", "status");
        for (const auto& row : rows)
          std::printf("  %-52s %14.6g %10.4g  %s\n", row.source.c_str(), row.required, row.ratio,
                      !row.applicable ? "n/a" : row.satisfied ? "ok" : "short");
      }
      return 0;
    }

    if (bounds->parsed()) {
      BoundReport b;
      if (b_bound == "minimax") {
        b = minimax_bound(b_n, b_r, b_sigma, b_delta_r);
      } else if (b_bound == "ideal" || b_bound == "instance") {
        if (b_spectrum.empty())
          throw std::invalid_argument("--spectrum is required");
        const auto spectrum = parse_doubles(b_spectrum);
        if (b_bound == "ideal") {
          b.name = "ideal";
          b.value = ideal_risk(spectrum, b_n, b_sigma);
          b.up_to_constants = false;
          b.inputs = {{"n", double(b_n)}, {"sigma", b_sigma}};
        } else {
          Index rbar = b_rbar;
          if (rbar == 0)
            rbar = std::min<Index>(rbar_heuristic(b_n, static_cast<Index>(b_m)), static_cast<Index>(spectrum.size()));
          b = instance_optimal_bound(spectrum, b_n, b_sigma, rbar);
        }
      } else if (b_bound == "stable") {
        b = completion_stability_bound(b_n, b_p, b_delta);
      } else {
        const double op = b_noise_op ? *b_noise_op : gaussian_noise_opnorm(b_n, b_m, b_sigma);
        b = optspace_noisy_bound(b_n, b_m, b_r, b_kappa, op);
      }
      if (b_format == "json") {
        std::cout << to_json(b).dump(2) << '\n';
      } else {
        std::printf("%s = %.10g%s\n", b.name.c_str(), b.value, b.up_to_constants ? "  (up to constants)" : "");
        for (const auto& [k, v] : b.inputs)
          std::printf("  %-14s %.10g\n", k.c_str(), v);
      }
      return 0;
    }

    if (bench->parsed()) {
      ExperimentConfig cfg = load_config(e_config);
      if (e_seed)
        cfg.seed = *e_seed;
      const ExperimentResult result = run_experiment(cfg, e_jobs);
      for (const auto& path : emit(result, e_out, parse_emit_format(e_format), e_plot))
        std::printf("wrote %s\n", path.c_str());
      for (const auto& c : result.cells)
        std::printf("n=%ld r=%ld m=%ld sigma=%g kappa=%g: success %.3f, median rel err %.3g, constant %.4g"
                    " (%d failed, %d not converged)\n",
                    static_cast<long>(c.params.n), static_cast<long>(c.params.r), static_cast<long>(c.params.m),
                    c.params.sigma, c.params.kappa, c.success_rate, c.median_rel_err, c.fitted_constant, c.failures,
                    c.nonconverged);
      for (const auto& a : result.acceptance)
        std::printf("%s %s: %s\n", a.passed ? "PASS" : "FAIL", a.name.c_str(), a.detail.c_str());
      return result.accepted() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lrr: %s\n", e.what());
    return 2;
  }
  return 0;
}
