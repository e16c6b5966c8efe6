#pragma once

// Result files of a run: moments.csv, report.json, timing.json, plus
// bounds.csv for SIMC. Stored moments can be read back as a reference.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "muscup/core/errors.hpp"
#include "muscup/core/field.hpp"
#include "muscup/core/timing.hpp"
#include "muscup/simc/error_bounds.hpp"
#include "muscup/uq/moments.hpp"

namespace muscup::harness {

namespace fs = std::filesystem;
using nlohmann::json;

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void write_coords(std::ostream& os, const Grid& g, std::size_t k) {
  const std::size_t p = k % g.points();
  os << fmt(g.x(p % g.nx));
  if (g.is_2d()) os << ',' << fmt(g.y(p / g.nx)) << ',' << k / g.points();
}

inline std::string coord_header(const Grid& g) {
  return g.is_2d() ? "x,y,component" : "x";
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

}  // namespace detail

/// One row per grid value. 1D: x,mean,std,ci_lo_mean,ci_hi_mean,ci_lo_std,
/// ci_hi_std. 2D grids add y and component after x.
inline void write_moments_csv(std::ostream& os, const MomentEstimate& m) {
  const Grid& g = m.mean.grid;
  os << detail::coord_header(g) << ",mean,std,ci_lo_mean,ci_hi_mean,ci_lo_std,ci_hi_std\n";
  for (std::size_t k = 0; k < m.mean.size(); ++k) {
    detail::write_coords(os, g, k);
    os << ',' << fmt(m.mean[k]) << ',' << fmt(m.std[k]) << ',' << fmt(m.ci_mean.lo[k]) << ','
       << fmt(m.ci_mean.hi[k]) << ',' << fmt(m.ci_std.lo[k]) << ',' << fmt(m.ci_std.hi[k]) << '\n';
  }
}

inline void write_bounds_csv(std::ostream& os, const ErrorBoundReport& r) {
  const Grid& g = r.eps_mean_bound.grid;
  os << detail::coord_header(g)
     << ",eps_mean_bound,eps_std_bound,ci_hi_mean_bound,ci_hi_std_bound,"
        "mc_ci_halfwidth_mean,mc_ci_halfwidth_std\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    detail::write_coords(os, g, k);
    os << ',' << fmt(r.eps_mean_bound[k]) << ',' << fmt(r.eps_std_bound[k]) << ','
       << fmt(r.ci_mean_bound.hi[k]) << ',' << fmt(r.ci_std_bound.hi[k]) << ','
       << fmt(r.mc_ci_halfwidth_mean[k]) << ',' << fmt(r.mc_ci_halfwidth_std[k]) << '\n';
  }
}

inline json timing_json(const TimingBreakdown& t) {
  return {{"t_total", t.t_total},
          {"t_micro", t.t_micro},
          {"t_macro", t.t_macro},
          {"t_overhead", t.t_overhead},
          {"micro_fraction", t.micro_fraction()},
          {"macro_fraction", t.macro_fraction()},
          {"overhead_fraction", t.overhead_fraction()}};
}

inline TimingBreakdown timing_from_json(const json& j) {
  TimingBreakdown t;
  t.t_total = j.at("t_total").get<double>();
  t.t_micro = j.at("t_micro").get<double>();
  t.t_macro = j.at("t_macro").get<double>();
  t.t_overhead = j.at("t_overhead").get<double>();
  return t;
}

inline json grid_json(const Grid& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"dx", g.dx}, {"dy", g.dy},
          {"x0", g.x0}, {"y0", g.y0}, {"components", g.components}};
}

inline json bounds_summary(const ErrorBoundReport& r) {
  return {{"bound_score_mean", r.bound_score_mean()},
          {"bound_score_std", r.bound_score_std()},
          {"mc_score_mean", r.mc_score_mean()},
          {"mc_score_std", r.mc_score_std()},
          {"n_samples", r.n_samples}};
}

inline void write_json(const fs::path& p, const json& j) {
  auto os = detail::open_out(p);
  os << j.dump(2) << '\n';
}

inline json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(p.string() + " is not valid JSON: " + e.what());
  }
}

/// Moments read back from a moments.csv; the grid is inferred from the
/// coordinate columns.
inline MomentEstimate read_moments_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  const bool two_d = cols.size() > 1 && cols[1] == "y";
  const std::vector<std::string> want =
      two_d ? std::vector<std::string>{"x", "y", "component", "mean", "std", "ci_lo_mean",
                                       "ci_hi_mean", "ci_lo_std", "ci_hi_std"}
            : std::vector<std::string>{"x", "mean", "std", "ci_lo_mean", "ci_hi_mean",
                                       "ci_lo_std", "ci_hi_std"};
  if (cols != want) throw IoError(path.string() + ": unexpected moments header '" + line + "'");

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
      try {
        r.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      }
    }
    if (r.size() != want.size())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(want.size()) + " columns");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw IoError(path.string() + " has no data rows");

  std::vector<double> xs, ys;
  std::size_t components = 1;
  for (const auto& r : rows) {
    xs.push_back(r[0]);
    if (two_d) {
      ys.push_back(r[1]);
      components = std::max(components, static_cast<std::size_t>(r[2]) + 1);
    }
  }
  auto distinct = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  xs = distinct(xs);
  ys = two_d ? distinct(ys) : std::vector<double>{0.0};
  Grid g = two_d ? Grid::plane(xs.size(), ys.size(), xs.size() > 1 ? xs[1] - xs[0] : 0.0,
                               ys.size() > 1 ? ys[1] - ys[0] : 0.0, xs[0], ys[0], components)
                 : Grid::line(xs.size(), xs.size() > 1 ? xs[1] - xs[0] : 0.0, xs[0]);
  if (g.size() != rows.size())
    throw IoError(path.string() + ": " + std::to_string(rows.size()) +
                  " rows do not form a complete grid");

  const std::size_t off = two_d ? 3 : 1;
  MomentEstimate m;
  m.mean = Field(g);
  m.std = Field(g);
  m.ci_mean = {Field(g), Field(g)};
  m.ci_std = {Field(g), Field(g)};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    m.mean[k] = r[off];
    m.std[k] = r[off + 1];
    m.ci_mean.lo[k] = r[off + 2];
    m.ci_mean.hi[k] = r[off + 3];
    m.ci_std.lo[k] = r[off + 4];
    m.ci_std.hi[k] = r[off + 5];
  }
  return m;
}

/// Accepts a run directory, its report.json or its moments.csv.
inline fs::path run_directory(const fs::path& p) {
  if (fs::is_directory(p)) return p;
  if (!fs::exists(p)) throw IoError("no such file or directory: " + p.string());
  return p.has_parent_path() ? p.parent_path() : fs::path(".");
}

inline void require_same_grid(const Grid& a, const Grid& b, const std::string& what) {
  if (a.nx != b.nx || a.ny != b.ny || a.components != b.components)
    throw ConfigError(what + ": grid " + std::to_string(a.nx) + "x" + std::to_string(a.ny) +
                      "x" + std::to_string(a.components) + " does not match reference grid " +
                      std::to_string(b.nx) + "x" + std::to_string(b.ny) + "x" +
                      std::to_string(b.components));
}

}  // namespace muscup::harness
