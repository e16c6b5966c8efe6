#pragma once

// Method comparison table: error and timing of stored runs against a stored
// reference run.

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "muscup/harness/report.hpp"

namespace muscup::harness {

struct ComparisonRow {
  std::string label;
  std::string method;
  std::string decision;  // empty unless the run has one
  double error = 0.0;    // mean relative std error vs the reference
  TimingBreakdown timing;
  double speedup = 0.0;  // reference total time / this total time
};

struct StoredRun {
  fs::path dir;
  json report;
  MomentEstimate moments;
};

inline StoredRun load_run(const fs::path& p) {
  StoredRun r;
  r.dir = run_directory(p);
  r.report = read_json(r.dir / "report.json");
  r.moments = read_moments_csv(r.dir / "moments.csv");
  return r;
}

inline ComparisonRow compare_run(const StoredRun& run, const StoredRun& ref, std::string label) {
  require_same_grid(run.moments.mean.grid, ref.moments.mean.grid, run.dir.string());
  ComparisonRow row;
  row.label = std::move(label);
  row.method = run.report.value("method", "?");
  if (run.report.contains("decision") && run.report.at("decision").is_string())
    row.decision = run.report.at("decision").get<std::string>();
  row.error = mean_relative_error(run.moments.std, ref.moments.std);
  row.timing = timing_from_json(run.report.at("timing"));
  const double t_ref = ref.report.at("timing").at("t_total").get<double>();
  row.speedup = row.timing.t_total > 0.0 ? t_ref / row.timing.t_total : 0.0;
  return row;
}

/// Every run directory directly under `reports` (and `reports` itself if it
/// holds a run), in name order.
inline std::vector<ComparisonRow> compare_methods(const fs::path& reports, const fs::path& reference) {
  if (!fs::is_directory(reports)) throw IoError("reports directory not found: " + reports.string());
  const StoredRun ref = load_run(reference);
  std::vector<fs::path> dirs;
  if (fs::exists(reports / "report.json")) dirs.push_back(reports);
  for (const auto& e : fs::directory_iterator(reports))
    if (e.is_directory() && fs::exists(e.path() / "report.json")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw IoError("no run directories with report.json under " + reports.string());
  std::vector<ComparisonRow> rows;
  for (const auto& d : dirs) rows.push_back(compare_run(load_run(d), ref, d.filename().string()));
  return rows;
}

inline void write_comparison(const std::vector<ComparisonRow>& rows, const fs::path& out) {
  fs::create_directories(out);
  {
    auto os = detail::open_out(out / "comparison.csv");
    os << "label,method,decision,mean_rel_std_error,T_total,T_mu_pct,T_M_pct,T_overhead_pct,speedup\n";
    for (const auto& r : rows)
      os << r.label << ',' << r.method << ',' << r.decision << ',' << fmt(r.error) << ','
         << fmt(r.timing.t_total) << ',' << fmt(100.0 * r.timing.micro_fraction()) << ','
         << fmt(100.0 * r.timing.macro_fraction()) << ','
         << fmt(100.0 * r.timing.overhead_fraction()) << ',' << fmt(r.speedup) << '\n';
  }
  json j = json::array();
  for (const auto& r : rows)
    j.push_back({{"label", r.label},
                 {"method", r.method},
                 {"decision", r.decision.empty() ? json(nullptr) : json(r.decision)},
                 {"mean_rel_std_error", r.error},
                 {"T_total", r.timing.t_total},
                 {"T_mu_pct", 100.0 * r.timing.micro_fraction()},
                 {"T_M_pct", 100.0 * r.timing.macro_fraction()},
                 {"T_overhead_pct", 100.0 * r.timing.overhead_fraction()},
                 {"speedup", r.speedup}});
  write_json(out / "comparison.json", json{{"rows", j}});
}

}  // namespace muscup::harness
