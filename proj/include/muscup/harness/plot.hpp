#pragma once

// Plot data extracted from stored runs: line profiles (a y-slice for 2D
// grids), full field dumps and timing/error bars. Each kind writes CSV and a
// minimal SVG rendering next to the report.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "muscup/harness/compare.hpp"
#include "muscup/harness/report.hpp"

namespace muscup::harness {

enum class PlotKind { profile, field, bars };

inline PlotKind parse_plot_kind(const std::string& s) {
  if (s == "profile") return PlotKind::profile;
  if (s == "field") return PlotKind::field;
  if (s == "bars") return PlotKind::bars;
  throw ConfigError("unknown plot kind '" + s + "' (expected profile, field or bars)");
}

inline constexpr double kSliceY = 0.625;

/// Values of one component along the line y = const, linearly interpolated
/// between the neighbouring grid rows. 1D grids return the whole component.
inline std::vector<double> slice_at_y(const Field& f, double y, std::size_t component = 0) {
  const Grid& g = f.grid;
  if (component >= g.components) throw ConfigError("slice: no component " + std::to_string(component));
  std::vector<double> out(g.nx);
  if (!g.is_2d()) {
    for (std::size_t i = 0; i < g.nx; ++i) out[i] = f[g.index(i, 0, component)];
    return out;
  }
  const double s = std::clamp((y - g.y0) / g.dy, 0.0, static_cast<double>(g.ny - 1));
  const auto j0 = std::min(static_cast<std::size_t>(s), g.ny - 2);
  const double w = s - static_cast<double>(j0);
  for (std::size_t i = 0; i < g.nx; ++i)
    out[i] = (1.0 - w) * f[g.index(i, j0, component)] + w * f[g.index(i, j0 + 1, component)];
  return out;
}

namespace detail {

struct Series {
  std::string name;
  std::vector<double> y;
};

inline void write_line_svg(const fs::path& p, const std::string& title, const std::vector<double>& x,
                           const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, m = 50;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series)
    for (double v : s.y) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(hi > lo)) hi = lo + 1.0;
  const double xl = x.front(), xh = x.back() > x.front() ? x.back() : x.front() + 1.0;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  auto os = open_out(p);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
     << "<text x=\"" << m << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n"
     << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\""
     << H - 2 * m << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[k % 6] << "\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i)
      os << m + (x[i] - xl) / (xh - xl) * (W - 2 * m) << ','
         << H - m - (series[k].y[i] - lo) / (hi - lo) * (H - 2 * m) << ' ';
    os << "\"/>\n<text x=\"" << W - m - 150 << "\" y=\"" << m + 16 * (k + 1) << "\" fill=\""
       << colors[k % 6] << "\" font-size=\"12\">" << series[k].name << "</text>\n";
  }
  os << "<text x=\"5\" y=\"" << m + 10 << "\" font-size=\"10\">" << fmt(hi) << "</text>\n"
     << "<text x=\"5\" y=\"" << H - m << "\" font-size=\"10\">" << fmt(lo) << "</text>\n</svg>\n";
}

inline void write_bars_svg(const fs::path& p, const std::vector<std::string>& labels,
                           const std::vector<std::vector<double>>& stacks,
                           const std::vector<std::string>& parts) {
  constexpr double W = 640, H = 400, m = 50;
  double top = 0.0;
  for (const auto& s : stacks) {
    double t = 0.0;
    for (double v : s) t += v;
    top = std::max(top, t);
  }
  if (!(top > 0.0)) top = 1.0;
  static const char* colors[] = {"#1f77b4", "#d62728", "#7f7f7f"};
  const double bw = (W - 2 * m) / static_cast<double>(std::max<std::size_t>(labels.size(), 1));
  auto os = open_out(p);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  for (std::size_t b = 0; b < stacks.size(); ++b) {
    double base = H - m;
    for (std::size_t k = 0; k < stacks[b].size(); ++k) {
      const double h = stacks[b][k] / top * (H - 2 * m);
      os << "<rect x=\"" << m + b * bw + 0.1 * bw << "\" y=\"" << base - h << "\" width=\""
         << 0.8 * bw << "\" height=\"" << h << "\" fill=\"" << colors[k % 3] << "\"/>\n";
      base -= h;
    }
    os << "<text x=\"" << m + b * bw + 0.1 * bw << "\" y=\"" << H - m + 15
       << "\" font-size=\"11\">" << labels[b] << "</text>\n";
  }
  for (std::size_t k = 0; k < parts.size(); ++k)
    os << "<text x=\"" << W - m - 120 << "\" y=\"" << m + 16 * (k + 1) << "\" fill=\""
       << colors[k % 3] << "\" font-size=\"12\">" << parts[k] << "</text>\n";
  os << "</svg>\n";
}

// Optional per-point columns of bounds.csv (SIMC runs), by name.
inline std::vector<std::vector<double>> read_bounds_columns(const fs::path& p, std::size_t skip) {
  std::vector<std::vector<double>> cols(6);
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string c;
    for (std::size_t k = 0; k < skip; ++k) std::getline(ss, c, ',');
    for (auto& col : cols) {
      std::getline(ss, c, ',');
      col.push_back(std::stod(c));
    }
  }
  return cols;
}

}  // namespace detail

/// Profile of mean, std and their intervals; at y = 0.625 for 2D grids.
/// Adds the SIMC error bounds and the error against the reference when the
/// run has them. Returns the CSV path.
inline fs::path plot_profile(const fs::path& report) {
  const StoredRun run = load_run(report);
  const MomentEstimate& m = run.moments;
  const Grid& g = m.mean.grid;
  const std::size_t comp = 0;
  std::vector<double> x(g.nx);
  for (std::size_t i = 0; i < g.nx; ++i) x[i] = g.x(i);
  std::vector<detail::Series> cols = {
      {"mean", slice_at_y(m.mean, kSliceY, comp)},     {"std", slice_at_y(m.std, kSliceY, comp)},
      {"ci_lo_mean", slice_at_y(m.ci_mean.lo, kSliceY, comp)},
      {"ci_hi_mean", slice_at_y(m.ci_mean.hi, kSliceY, comp)},
      {"ci_lo_std", slice_at_y(m.ci_std.lo, kSliceY, comp)},
      {"ci_hi_std", slice_at_y(m.ci_std.hi, kSliceY, comp)}};
  std::vector<detail::Series> svg = {cols[1]};
  if (fs::exists(run.dir / "bounds.csv")) {
    const auto b = detail::read_bounds_columns(run.dir / "bounds.csv", g.is_2d() ? 3 : 1);
    Field eps(g), ci(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      eps[k] = b[1][k];
      ci[k] = b[3][k];
    }
    cols.push_back({"eps_std_bound", slice_at_y(eps, kSliceY, comp)});
    cols.push_back({"ci_hi_std_bound", slice_at_y(ci, kSliceY, comp)});
    svg.push_back(cols[cols.size() - 2]);
    svg.push_back(cols.back());
  }
  if (run.report.contains("reference") && run.report.at("reference").is_string()) {
    const StoredRun ref = load_run(run.report.at("reference").get<std::string>());
    require_same_grid(g, ref.moments.mean.grid, "reference");
    auto rs = slice_at_y(ref.moments.std, kSliceY, comp);
    std::vector<double> err(g.nx);
    for (std::size_t i = 0; i < g.nx; ++i) err[i] = std::abs(cols[1].y[i] - rs[i]);
    cols.push_back({"ref_std", rs});
    cols.push_back({"abs_std_error", err});
    svg.push_back(cols.back());
  }
  const fs::path csv = run.dir / "profile.csv";
  auto os = detail::open_out(csv);
  os << "x";
  for (const auto& c : cols) os << ',' << c.name;
  os << '\n';
  for (std::size_t i = 0; i < g.nx; ++i) {
    os << fmt(x[i]);
    for (const auto& c : cols) os << ',' << fmt(c.y[i]);
    os << '\n';
  }
  detail::write_line_svg(run.dir / "profile.svg",
                         g.is_2d() ? "std profile at y = 0.625" : "std profile", x, svg);
  return csv;
}

/// Row-major dumps of the mean and std fields, one file per component:
/// a header row of x coordinates, then one row of nx values per y (ny rows).
inline std::vector<fs::path> plot_field(const fs::path& report) {
  const StoredRun run = load_run(report);
  const Grid& g = run.moments.mean.grid;
  std::vector<fs::path> files;
  for (const auto& [name, f] : {std::pair{"mean", &run.moments.mean}, std::pair{"std", &run.moments.std}})
    for (std::size_t c = 0; c < g.components; ++c) {
      const fs::path p = run.dir / ("field_" + std::string(name) + "_c" + std::to_string(c) + ".csv");
      auto os = detail::open_out(p);
      for (std::size_t i = 0; i < g.nx; ++i) os << (i ? "," : "") << "x=" << fmt(g.x(i));
      os << '\n';
      for (std::size_t j = 0; j < g.ny; ++j) {
        for (std::size_t i = 0; i < g.nx; ++i) os << (i ? "," : "") << fmt((*f)[g.index(i, j, c)]);
        os << '\n';
      }
      files.push_back(p);
    }
  return files;
}

/// Timing bars. Accepts a run (one bar) or a comparison.json (one bar per
/// row, with the error column).
inline fs::path plot_bars(const fs::path& file) {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> stacks;
  std::vector<double> errors;
  fs::path dir;
  if (!fs::is_directory(file) && file.filename() == "comparison.json") {
    dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
    const json j = read_json(file);
    for (const auto& r : j.at("rows")) {
      const double t = r.at("T_total").get<double>();
      labels.push_back(r.at("label").get<std::string>());
      stacks.push_back({t * r.at("T_mu_pct").get<double>() / 100.0,
                        t * r.at("T_M_pct").get<double>() / 100.0,
                        t * r.at("T_overhead_pct").get<double>() / 100.0});
      errors.push_back(r.at("mean_rel_std_error").get<double>());
    }
  } else {
    dir = run_directory(file);
    const json rep = read_json(dir / "report.json");
    const TimingBreakdown t = timing_from_json(rep.at("timing"));
    labels.push_back(rep.value("method", "run"));
    stacks.push_back({t.t_micro, t.t_macro, t.t_overhead});
    const auto& e = rep.at("mean_rel_std_error");
    errors.push_back(e.is_number() ? e.get<double>() : std::nan(""));
  }
  const fs::path csv = dir / "bars.csv";
  auto os = detail::open_out(csv);
  os << "label,t_micro,t_macro,t_overhead,mean_rel_std_error\n";
  for (std::size_t b = 0; b < labels.size(); ++b)
    os << labels[b] << ',' << fmt(stacks[b][0]) << ',' << fmt(stacks[b][1]) << ','
       << fmt(stacks[b][2]) << ',' << fmt(errors[b]) << '\n';
  detail::write_bars_svg(dir / "bars.svg", labels, stacks, {"micro", "macro", "overhead"});
  return csv;
}

}  // namespace muscup::harness
