#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "lrr/bench.hpp"
#include "lrr/serialize.hpp"

namespace lrr {

namespace {

std::string num(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

} // namespace

EmitFormat parse_emit_format(const std::string& s)
{
  if (s == "csv")
    return EmitFormat::csv;
  if (s == "json")
    return EmitFormat::json;
  if (s == "both")
    return EmitFormat::both;
  throw std::invalid_argument("unknown format '" + s + "' (csv, json, both)");
}

void write_csv(std::ostream& os, const ExperimentResult& result)
{
  os << "n,r,m,p,sigma,kappa,trials,success_rate,median_rel_err,median_sq_err,fitted_constant,failures,seconds\n";
  for (const auto& c : result.cells) {
    os << c.params.n << ',' << c.params.r << ',' << c.params.m << ',' << num(c.params.p) << ','
       << num(c.params.sigma) << ',' << num(c.params.kappa) << ',' << c.trials << ',' << num(c.success_rate) << ','
       << num(c.median_rel_err) << ',' << num(c.median_sq_err) << ',' << num(c.fitted_constant) << ','
       << (c.trials - c.successes) << ',' << num(c.seconds) << '\n';
  }
}

void write_json(std::ostream& os, const ExperimentResult& result)
{
  os << to_json(result).dump(2) << '\n';
}

void write_svg(std::ostream& os, const ExperimentResult& result)
{
  // Success rate against m, one polyline per (n, r).
  const double W = 640, H = 400, L = 60, R = 20, T = 30, B = 50;
  double mlo = 1e300, mhi = -1e300;
  std::map<std::pair<Index, Index>, std::vector<std::pair<double, double>>> series;
  for (const auto& c : result.cells) {
    const double m = static_cast<double>(c.params.m);
    mlo = std::min(mlo, m);
    mhi = std::max(mhi, m);
    series[{c.params.n, c.params.r}].emplace_back(m, c.success_rate);
  }
  if (mhi <= mlo)
    mhi = mlo + 1.0;
  const auto px = [&](double m) { return L + (m - mlo) / (mhi - mlo) * (W - L - R); };
  const auto py = [&](double s) { return T + (1.0 - s) * (H - T - B); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << L << "\" y=\"20\" font-size=\"14\">" << to_string(result.config.experiment)
     << ": success rate vs m</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << W - R << "\" y2=\"" << py(0)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << L << "\" y2=\"" << py(1) << "\" stroke=\"black\"/>\n";
  for (double s : {0.0, 0.5, 1.0})
    os << "<text x=\"" << L - 30 << "\" y=\"" << py(s) + 4 << "\" font-size=\"11\">" << num(s) << "</text>\n";
  os << "<text x=\"" << L << "\" y=\"" << H - 15 << "\" font-size=\"11\">m = " << num(mlo) << "</text>\n";
  os << "<text x=\"" << W - R - 80 << "\" y=\"" << H - 15 << "\" font-size=\"11\">m = " << num(mhi) << "</text>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::size_t k = 0;
  for (auto& [nr, pts] : series) {
    std::sort(pts.begin(), pts.end());
    const char* color = colors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [m, s] : pts)
      os << px(m) << ',' << py(s) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << W - R - 110 << "\" y=\"" << T + 15 * (k + 1) << "\" font-size=\"11\" fill=\"" << color
       << "\">n=" << nr.first << " r=" << nr.second << "</text>\n";
    ++k;
  }
  os << "</svg>\n";
}

std::vector<std::string> emit(const ExperimentResult& result, const std::string& dir, EmitFormat format, bool plot)
{
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("cannot create output directory '" + dir + "'");
  const std::string stem = result.config.name.empty() ? to_string(result.config.experiment) : result.config.name;

  std::vector<std::string> written;
  const auto write = [&](const std::string& ext, auto&& fn) {
    const std::string path = (fs::path(dir) / (stem + ext)).string();
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write '" + path + "'");
    fn(out);
    out.flush();
    if (!out)
      throw std::runtime_error("write failed for '" + path + "'");
    written.push_back(path);
  };
  if (format != EmitFormat::json)
    write(".csv", [&](std::ostream& os) { write_csv(os, result); });
  if (format != EmitFormat::csv)
    write(".json", [&](std::ostream& os) { write_json(os, result); });
  if (plot)
    write(".svg", [&](std::ostream& os) { write_svg(os, result); });
  return written;
}

} // namespace lrr
