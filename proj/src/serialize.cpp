#include "lrr/serialize.hpp"

#include <cmath>

namespace lrr {

using nlohmann::json;

namespace {

json number_list(const std::vector<double>& v)
{
  json a = json::array();
  for (double x : v)
    a.push_back(json_number(x));
  return a;
}

json matrix_rows(const Matrix& M)
{
  json a = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j)
      row.push_back(json_number(M(i, j)));
    a.push_back(std::move(row));
  }
  return a;
}

const char* size_kind_name(SampleSize k)
{
  switch (k) {
  case SampleSize::absolute:
    return "m";
  case SampleSize::factor:
    return "m_factor";
  case SampleSize::fraction:
    return "p";
  }
  return "?";
}

} // namespace

json json_number(double v)
{
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json to_json(const SolverReport& r, bool include_estimate)
{
  json j{{"objective", json_number(r.objective)},
         {"equality_residual", json_number(r.equality_residual)},
         {"dual_residual", json_number(r.dual_residual)},
         {"iterations", r.iterations},
         {"converged", r.converged},
         {"tau_path", number_list(r.tau_path)},
         {"residual_path", number_list(r.residual_path)},
         {"message", r.message},
         {"rows", r.estimate.rows()},
         {"cols", r.estimate.cols()}};
  if (include_estimate)
    j["estimate"] = matrix_rows(r.estimate);
  return j;
}

json to_json(const CoherenceReport& r)
{
  return {{"mu_B", json_number(r.mu_B)}, {"mu0", json_number(r.mu0)},     {"mu1", json_number(r.mu1)},
          {"mu", json_number(r.mu_strong)}, {"mu2", json_number(r.mu2)}, {"kappa", json_number(r.kappa)},
          {"r", r.r},                      {"n1", r.n1},                  {"n2", r.n2}};
}

json to_json(const RipEstimate& r)
{
  return {{"r", r.r}, {"delta_hat", json_number(r.delta_hat)}, {"probes", r.probes}, {"seed", r.seed}};
}

json to_json(const std::vector<AdvisorRow>& rows)
{
  json a = json::array();
  for (const auto& row : rows)
    a.push_back({{"source", row.source},
                 {"requirement", row.requirement},
                 {"required", json_number(row.required)},
                 {"applicable", row.applicable},
                 {"ratio", json_number(row.ratio)},
                 {"satisfied", row.satisfied}});
  return a;
}

json to_json(const BoundReport& b)
{
  json inputs = json::object();
  for (const auto& [k, v] : b.inputs)
    inputs[k] = json_number(v);
  return {{"bound", b.name}, {"value", json_number(b.value)}, {"up_to_constants", b.up_to_constants}, {"inputs", inputs}};
}

json to_json(const ExperimentConfig& c)
{
  json cells = json::array();
  for (const auto& [n, r] : c.grid.cells)
    cells.push_back({n, r});
  json floors = json::object();
  const AcceptanceFloors& a = c.acceptance;
  const auto put = [&](const char* k, const std::optional<double>& v) {
    if (v)
      floors[k] = *v;
  };
  put("min_success_rate", a.min_success_rate);
  put("max_constant_spread", a.max_constant_spread);
  put("constant_min", a.constant_min);
  put("constant_max", a.constant_max);
  put("crossing_factor", a.crossing_factor);
  put("min_error_ratio", a.min_error_ratio);
  put("max_baseline_error", a.max_baseline_error);
  return {{"experiment", to_string(c.experiment)},
          {"name", c.name},
          {"trials", c.trials},
          {"seed", c.seed},
          {"success_threshold", c.success_threshold},
          {"ensemble", to_string(c.ensemble)},
          {"spectrum", c.spectrum},
          {"spectrum_scale", c.spectrum_scale},
          {"spectrum_ratio", c.spectrum_ratio},
          {"c_mult", c.c_mult},
          {"record_timing", c.record_timing},
          {"baseline", c.baseline},
          {"grid",
           {{"cells", cells},
            {"n", c.grid.n},
            {"r", c.grid.r},
            {"size_kind", size_kind_name(c.grid.size_kind)},
            {"size", c.grid.size},
            {"sigma", c.grid.sigma},
            {"kappa", c.grid.kappa}}},
          {"solver",
           {{"max_iters", c.solver.max_iters},
            {"fista_tol", c.solver.fista_tol},
            {"eq_tol", c.solver.eq_tol},
            {"continuation_factor", c.solver.continuation_factor},
            {"bisection_iters", c.solver.bisection_iters}}},
          {"optspace",
           {{"max_iters", c.optspace.max_iters},
            {"grad_tol", c.optspace.grad_tol},
            {"shrink", c.optspace.shrink},
            {"sufficient_decrease", c.optspace.sufficient_decrease},
            {"trim_multiplier", c.optspace.trim_multiplier}}},
          {"acceptance", floors}};
}

json to_json(const ExperimentResult& r)
{
  json cells = json::array();
  for (const auto& c : r.cells) {
    json trials = json::array();
    for (const auto& t : c.records) {
      json extra = json::object();
      for (const auto& [k, v] : t.extra)
        extra[k] = json_number(v);
      trials.push_back({{"trial", t.trial},
                        {"seed", t.seed},
                        {"outcome", to_string(t.outcome)},
                        {"rel_err", json_number(t.rel_err)},
                        {"sq_err", json_number(t.sq_err)},
                        {"formula", json_number(t.formula)},
                        {"ratio", json_number(t.ratio)},
                        {"iterations", t.iterations},
                        {"seconds", json_number(t.seconds)},
                        {"extra", extra},
                        {"message", t.message}});
    }
    cells.push_back({{"n", c.params.n},
                     {"r", c.params.r},
                     {"m", c.params.m},
                     {"p", json_number(c.params.p)},
                     {"sigma", json_number(c.params.sigma)},
                     {"kappa", json_number(c.params.kappa)},
                     {"trials", c.trials},
                     {"successes", c.successes},
                     {"failures", c.failures},
                     {"nonconverged", c.nonconverged},
                     {"success_rate", json_number(c.success_rate)},
                     {"median_rel_err", json_number(c.median_rel_err)},
                     {"max_rel_err", json_number(c.max_rel_err)},
                     {"median_sq_err", json_number(c.median_sq_err)},
                     {"median_measured", json_number(c.median_measured)},
                     {"median_formula", json_number(c.median_formula)},
                     {"fitted_constant", json_number(c.fitted_constant)},
                     {"seconds", json_number(c.seconds)},
                     {"records", trials}});
  }
  json acceptance = json::array();
  for (const auto& a : r.acceptance)
    acceptance.push_back({{"check", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  json j{{"version", r.version}, {"config", to_json(r.config)}, {"cells", cells}, {"acceptance", acceptance}};
  if (const auto id = formula_id(r.config.experiment); id && r.cells.size() >= 3) {
    try {
      const ConstantFit fit = fit_empirical_constant(r, *id);
      j["fit"] = {{"formula", *id},
                  {"slope", json_number(fit.slope)},
                  {"min_ratio", json_number(fit.min_ratio)},
                  {"max_ratio", json_number(fit.max_ratio)},
                  {"cells", fit.cells}};
    } catch (const std::invalid_argument& e) {
      j["fit"] = {{"formula", *id}, {"error", e.what()}};
    }
  }
  return j;
}

} // namespace lrr
