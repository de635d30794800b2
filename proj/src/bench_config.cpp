#include "lrr/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lrr {

namespace {

const std::pair<Experiment, const char*> kExperimentNames[] = {
    {Experiment::phase_transition, "phase-transition"},
    {Experiment::dantzig_scaling, "dantzig-scaling"},
    {Experiment::bias_variance, "bias-variance"},
    {Experiment::instance_optimal, "instance-optimal"},
    {Experiment::completion_stability, "completion-stability"},
    {Experiment::optspace_compare, "optspace-compare"},
};

std::string trim_ws(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(trim_ws(item));
  return out;
}

struct LineError {
  int line;
  std::string fail(const std::string& what) const { return "config line " + std::to_string(line) + ": " + what; }
};

double to_double(const std::string& s, const LineError& at)
{
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(at.fail("'" + s + "' is not a number"));
  }
  if (pos != s.size() || !std::isfinite(v))
    throw std::invalid_argument(at.fail("'" + s + "' is not a finite number"));
  return v;
}

long long to_int(const std::string& s, const LineError& at)
{
  const double v = to_double(s, at);
  if (v != std::floor(v) || std::abs(v) > 9.0e15)
    throw std::invalid_argument(at.fail("'" + s + "' is not an integer"));
  return static_cast<long long>(v);
}

std::uint64_t to_u64(const std::string& s, const LineError& at)
{
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    if (!s.empty() && s[0] == '-')
      throw std::invalid_argument("negative");
    v = std::stoull(s, &pos, 0);
  } catch (const std::exception&) {
    throw std::invalid_argument(at.fail("'" + s + "' is not an unsigned 64-bit integer"));
  }
  if (pos != s.size())
    throw std::invalid_argument(at.fail("'" + s + "' is not an unsigned 64-bit integer"));
  return v;
}

bool to_bool(const std::string& s, const LineError& at)
{
  if (s == "true" || s == "1" || s == "yes")
    return true;
  if (s == "false" || s == "0" || s == "no")
    return false;
  throw std::invalid_argument(at.fail("'" + s + "' is not a boolean"));
}

std::vector<double> double_list(const std::string& s, const LineError& at)
{
  std::vector<double> out;
  for (const auto& item : split_list(s))
    out.push_back(to_double(item, at));
  return out;
}

std::vector<Index> index_list(const std::string& s, const LineError& at)
{
  std::vector<Index> out;
  for (const auto& item : split_list(s))
    out.push_back(static_cast<Index>(to_int(item, at)));
  return out;
}

} // namespace

std::string to_string(Experiment e)
{
  for (const auto& [k, name] : kExperimentNames)
    if (k == e)
      return name;
  throw std::invalid_argument("unknown experiment");
}

Experiment parse_experiment(const std::string& name)
{
  for (const auto& [k, n] : kExperimentNames)
    if (name == n)
      return k;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

bool AcceptanceFloors::any() const
{
  return min_success_rate || max_constant_spread || constant_min || constant_max || crossing_factor ||
         min_error_ratio || max_baseline_error;
}

ExperimentConfig parse_config(std::istream& is)
{
  ExperimentConfig cfg;
  bool size_seen = false;
  bool experiment_seen = false;
  std::string section;
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const LineError at{lineno};
    const auto hash = raw.find('#');
    const std::string line = trim_ws(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument(at.fail("unterminated section header"));
      section = trim_ws(line.substr(1, line.size() - 2));
      if (section != "grid" && section != "solver" && section != "optspace" && section != "acceptance")
        throw std::invalid_argument(at.fail("unknown section [" + section + "]"));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(at.fail("expected 'key = value'"));
    const std::string key = trim_ws(line.substr(0, eq));
    const std::string val = trim_ws(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument(at.fail("empty key or value"));
    const auto unknown = [&] {
      return std::invalid_argument(
          at.fail("unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]")));
    };

    if (section.empty()) {
      if (key == "experiment") {
        try {
          cfg.experiment = parse_experiment(val);
        } catch (const std::invalid_argument& e) {
          throw std::invalid_argument(at.fail(e.what()));
        }
        experiment_seen = true;
      } else if (key == "name") {
        cfg.name = val;
      } else if (key == "trials") {
        cfg.trials = static_cast<int>(to_int(val, at));
      } else if (key == "seed") {
        cfg.seed = to_u64(val, at);
      } else if (key == "success_threshold") {
        cfg.success_threshold = to_double(val, at);
      } else if (key == "ensemble") {
        try {
          cfg.ensemble = parse_ensemble_kind(val);
        } catch (const std::invalid_argument& e) {
          throw std::invalid_argument(at.fail(e.what()));
        }
        cfg.ensemble_set = true;
      } else if (key == "spectrum") {
        if (val != "equal" && val != "geometric")
          throw std::invalid_argument(at.fail("spectrum must be equal or geometric"));
        cfg.spectrum = val;
      } else if (key == "spectrum_scale") {
        cfg.spectrum_scale = to_double(val, at);
      } else if (key == "spectrum_ratio") {
        cfg.spectrum_ratio = to_double(val, at);
      } else if (key == "c_mult") {
        cfg.c_mult = to_double(val, at);
      } else if (key == "record_timing") {
        cfg.record_timing = to_bool(val, at);
      } else if (key == "baseline") {
        cfg.baseline = to_bool(val, at);
      } else {
        throw unknown();
      }
    } else if (section == "grid") {
      Grid& g = cfg.grid;
      const auto set_size = [&](SampleSize kind) {
        if (size_seen)
          throw std::invalid_argument(at.fail("only one of m, m_factor, p may be given"));
        size_seen = true;
        g.size_kind = kind;
        g.size = double_list(val, at);
      };
      if (key == "n") {
        g.n = index_list(val, at);
      } else if (key == "r") {
        g.r = index_list(val, at);
      } else if (key == "cells") {
        g.cells.clear();
        for (const auto& item : split_list(val)) {
          const auto colon = item.find(':');
          if (colon == std::string::npos)
            throw std::invalid_argument(at.fail("cells entries are n:r"));
          g.cells.emplace_back(static_cast<Index>(to_int(trim_ws(item.substr(0, colon)), at)),
                               static_cast<Index>(to_int(trim_ws(item.substr(colon + 1)), at)));
        }
      } else if (key == "m") {
        set_size(SampleSize::absolute);
      } else if (key == "m_factor") {
        set_size(SampleSize::factor);
      } else if (key == "p") {
        set_size(SampleSize::fraction);
      } else if (key == "sigma") {
        g.sigma = double_list(val, at);
      } else if (key == "kappa") {
        g.kappa = double_list(val, at);
      } else {
        throw unknown();
      }
    } else if (section == "solver") {
      SolverConfig& s = cfg.solver;
      if (key == "max_iters")
        s.max_iters = static_cast<int>(to_int(val, at));
      else if (key == "fista_tol")
        s.fista_tol = to_double(val, at);
      else if (key == "eq_tol")
        s.eq_tol = to_double(val, at);
      else if (key == "continuation_factor")
        s.continuation_factor = to_double(val, at);
      else if (key == "bisection_iters")
        s.bisection_iters = static_cast<int>(to_int(val, at));
      else
        throw unknown();
    } else if (section == "optspace") {
      OptspaceConfig& o = cfg.optspace;
      if (key == "max_iters")
        o.max_iters = static_cast<int>(to_int(val, at));
      else if (key == "grad_tol")
        o.grad_tol = to_double(val, at);
      else if (key == "shrink")
        o.shrink = to_double(val, at);
      else if (key == "sufficient_decrease")
        o.sufficient_decrease = to_double(val, at);
      else if (key == "trim_multiplier")
        o.trim_multiplier = to_double(val, at);
      else
        throw unknown();
    } else {
      AcceptanceFloors& a = cfg.acceptance;
      const double v = to_double(val, at);
      if (key == "min_success_rate")
        a.min_success_rate = v;
      else if (key == "max_constant_spread")
        a.max_constant_spread = v;
      else if (key == "constant_min")
        a.constant_min = v;
      else if (key == "constant_max")
        a.constant_max = v;
      else if (key == "crossing_factor")
        a.crossing_factor = v;
      else if (key == "min_error_ratio")
        a.min_error_ratio = v;
      else if (key == "max_baseline_error")
        a.max_baseline_error = v;
      else
        throw unknown();
    }
  }
  if (!experiment_seen)
    throw std::invalid_argument("config: missing 'experiment'");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config '" + path + "'");
  return parse_config(in);
}

void ExperimentConfig::validate()
{
  const bool completion = experiment == Experiment::completion_stability || experiment == Experiment::optspace_compare;
  if (!ensemble_set) {
    if (completion)
      ensemble = EnsembleKind::entry_sampling;
    else if (experiment == Experiment::bias_variance)
      ensemble = EnsembleKind::vectorization;
    else
      ensemble = EnsembleKind::gaussian;
    ensemble_set = true;
  }
  if (spectrum.empty())
    spectrum = experiment == Experiment::bias_variance || experiment == Experiment::instance_optimal ? "geometric"
                                                                                                      : "equal";
  if (completion && ensemble != EnsembleKind::entry_sampling)
    throw std::invalid_argument(to_string(experiment) + " requires the entry-sampling ensemble");

  if (trials < 1)
    throw std::invalid_argument("config: trials must be >= 1");
  if (grid.cells.empty() && grid.n.empty())
    throw std::invalid_argument("config: grid needs n or cells");
  if (grid.sigma.empty() || grid.kappa.empty())
    throw std::invalid_argument("config: sigma and kappa lists must be nonempty");
  const bool vec = ensemble == EnsembleKind::vectorization;
  if (vec && !grid.size.empty())
    throw std::invalid_argument("config: the vectorization ensemble fixes m = n^2; drop m, m_factor and p");
  if (!vec && grid.size.empty())
    throw std::invalid_argument("config: grid needs one of m, m_factor, p");
  for (double s : grid.size)
    if (!(s > 0.0) || (grid.size_kind == SampleSize::fraction && s > 1.0))
      throw std::invalid_argument("config: sample sizes must be positive (p <= 1)");
  for (double s : grid.sigma)
    if (!(s >= 0.0))
      throw std::invalid_argument("config: sigma must be >= 0");
  for (double k : grid.kappa)
    if (!(k >= 1.0))
      throw std::invalid_argument("config: kappa must be >= 1");
  for (double s : grid.sigma) {
    if (experiment == Experiment::phase_transition && s != 0.0)
      throw std::invalid_argument("phase-transition is noiseless; sigma must be 0");
    const bool needs_noise = experiment == Experiment::dantzig_scaling || experiment == Experiment::bias_variance ||
                             experiment == Experiment::instance_optimal;
    if (needs_noise && !(s > 0.0))
      throw std::invalid_argument(to_string(experiment) + " needs sigma > 0");
  }
  if (!(success_threshold > 0.0))
    throw std::invalid_argument("config: success_threshold must be positive");
  if (!(spectrum_scale > 0.0) || !(spectrum_ratio > 0.0 && spectrum_ratio <= 1.0))
    throw std::invalid_argument("config: spectrum_scale > 0 and spectrum_ratio in (0, 1] required");
  if (!(c_mult > 0.0))
    throw std::invalid_argument("config: c_mult must be positive");
  solver.validate();
  optspace.validate();
  for (const auto& [n, r] : grid.cells)
    if (n < 1 || r < 1 || r > n)
      throw std::invalid_argument("config: cells need 1 <= r <= n");
  for (Index n : grid.n)
    if (n < 1)
      throw std::invalid_argument("config: n must be positive");
  for (Index r : grid.r)
    if (r < 1)
      throw std::invalid_argument("config: r must be positive");
  // Surface per-cell problems (m out of range, r > n) now rather than mid-run.
  (void)expand_grid(*this);
}

} // namespace lrr
