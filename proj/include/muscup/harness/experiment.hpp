#pragma once

// Runs one configured experiment and writes its result files.

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "muscup/gp/metamodel.hpp"
#include "muscup/harness/config.hpp"
#include "muscup/harness/report.hpp"
#include "muscup/pc/galerkin.hpp"
#include "muscup/simc/simc.hpp"
#include "muscup/uq/monte_carlo.hpp"

namespace muscup::harness {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitRejected = 2;

/// Thread count: MUSC_UP_THREADS, else the command line, else the config.
inline int resolve_threads(int configured, std::optional<int> cli, const char* env) {
  int t = cli.value_or(configured);
  if (env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError(std::string("MUSC_UP_THREADS must be a positive integer, got '") + env + "'");
    t = static_cast<int>(v);
  }
  if (t < 1) throw ConfigError("thread count must be at least 1");
  return t;
}

struct RunOutcome {
  UPResult result;
  std::optional<ErrorBoundReport> bounds;
  bool fallback = false;
  std::optional<MetamodelResult> metamodel;
  std::optional<PCExpansion> expansion;
  std::optional<PCBasis> basis;
  json report;
  int exit_code = kExitSuccess;
};

namespace detail {

template <CoupledProblem P>
void run_sampling(const P& problem, const ExperimentConfig& c, const InputDistribution& dist,
                  const MethodOptions& mo, RunOutcome& out) {
  switch (c.method) {
    case Method::mc:
      out.result = run_mc(problem, dist, c.sampling.N, c.seed, mo);
      break;
    case Method::simc: {
      SimcResult s = run_simc(problem, dist, c.sampling, c.seed, SimcOptions{mo, false});
      out.result = std::move(s.estimate);
      out.bounds = std::move(s.report);
      out.fallback = s.fallback;
      break;
    }
    case Method::gp: {
      MetamodelOptions go;
      go.method = mo;
      go.gp = c.gp;
      MetamodelResult g = run_metamodel_up(problem, dist, c.sampling.N, c.seed, go);
      out.result = g.estimate;
      out.metamodel = std::move(g);
      break;
    }
    default:
      break;
  }
}

inline json resolved_config(const ExperimentConfig& c, const InputDistribution& dist) {
  json d = json::array();
  for (std::size_t i = 0; i < dist.dimension(); ++i)
    d.push_back({{"mean", dist[i].mean}, {"rel_half_width", dist[i].rel_half_width}});
  json j = {{"model", to_string(c.model)}, {"method", to_string(c.method)}, {"seed", c.seed},
            {"threads", c.threads}, {"distribution", d}};
  if (c.model == ModelKind::case1) {
    const auto m = c.case1_config();
    j["time_scales"] = {{"dt_macro", m.dt_macro}, {"n_micro", m.n_micro}, {"t_end", m.t_end}};
    j["grid"] = {{"dx", m.dx}};
  } else {
    const auto m = c.case2_config();
    j["time_scales"] = {{"dt_macro", m.dt_macro}, {"n_micro", m.n_micro}, {"t_end", m.t_end}};
    j["grid"] = {{"nx", m.nx}, {"ny", m.ny}, {"L", m.L}};
  }
  switch (c.method) {
    case Method::mc:
      j["sampling"] = {{"N", c.sampling.N}};
      break;
    case Method::simc:
      j["sampling"] = {{"N", c.sampling.N}, {"N_mu", c.sampling.N_mu},
                       {"selection", c.sampling.selection == Selection::maximin ? "maximin" : "first"}};
      break;
    case Method::gp:
      j["sampling"] = {{"N", c.sampling.N}};
      j["gp"] = {{"N_meta", c.gp.N_meta}, {"nugget", c.gp.nugget},
                 {"multistarts", c.gp.multistarts}, {"max_evaluations", c.gp.max_evaluations}};
      break;
    default:
      j["pc"] = {{"order", c.effective_pc_order()},
                 {"quadrature_level", c.effective_quadrature_level()}};
  }
  j["bootstrap"] = {{"resamples", c.bootstrap.resamples}, {"level", c.bootstrap.level}};
  return j;
}

}  // namespace detail

/// Runs the experiment in memory.
inline RunOutcome run_experiment(const ExperimentConfig& c) {
  const InputDistribution dist = c.input_distribution();
  MethodOptions mo;
  mo.threads = c.threads;
  mo.keep_history = c.history == History::all;
  mo.bootstrap = c.bootstrap;

  RunOutcome out;
  const bool spectral = c.method == Method::galerkin || c.method == Method::coupled_pc;
  if (spectral) {
    out.basis.emplace(dist.dimension(), c.effective_pc_order(), c.effective_quadrature_level());
    PCResult r;
    if (c.model == ModelKind::case1) {
      r = c.method == Method::galerkin ? galerkin_run_1d(c.case1_config(), dist, *out.basis, mo)
                                       : coupled_pc_run_1d(c.case1_config(), dist, *out.basis, mo);
    } else {
      r = c.method == Method::galerkin ? galerkin_run_gs(c.case2_config(), dist, *out.basis, mo)
                                       : coupled_pc_run_gs(c.case2_config(), dist, *out.basis, mo);
    }
    out.result = std::move(r.estimate);
    out.expansion = std::move(r.final);
  } else if (c.model == ModelKind::case1) {
    detail::run_sampling(rd1d::ReactionDiffusion1D(c.case1_config()), c, dist, mo, out);
  } else {
    detail::run_sampling(gs::GrayScott(c.case2_config()), c, dist, mo, out);
  }

  const MomentEstimate& m = out.result.final;
  json& rep = out.report;
  rep["method"] = to_string(c.method);
  rep["model"] = to_string(c.model);
  rep["decision"] = out.bounds ? json(to_string(out.bounds->decision)) : json(nullptr);
  rep["fallback"] = out.fallback;
  rep["mean_rel_std_error"] = nullptr;
  rep["speedup"] = nullptr;
  rep["timing"] = timing_json(out.result.timing);
  rep["seed"] = c.seed;
  rep["config"] = c.raw;
  rep["resolved_config"] = detail::resolved_config(c, dist);
  rep["n_samples"] = m.n_samples;
  rep["confidence_level"] = m.confidence_level;
  rep["grid"] = grid_json(m.mean.grid);
  rep["spatial_mean_std"] = spatial_mean(m.std);
  if (out.bounds) rep["error_bounds"] = bounds_summary(*out.bounds);
  if (out.metamodel) {
    const auto& g = *out.metamodel;
    rep["gp"] = {{"lengthscales", g.hyper.lengthscales},
                 {"signal_variance", g.hyper.signal_variance},
                 {"nugget", g.nugget},
                 {"log_likelihood", g.log_likelihood},
                 {"training_points", g.design.rows()}};
  }
  if (out.basis) rep["pc"] = {{"order", out.basis->order()}, {"basis_size", out.basis->size()}};

  if (c.reference) {
    const fs::path dir = run_directory(*c.reference);
    const MomentEstimate ref = read_moments_csv(dir / "moments.csv");
    require_same_grid(m.mean.grid, ref.mean.grid, "reference " + dir.string());
    rep["reference"] = dir.string();
    rep["mean_rel_std_error"] = mean_relative_error(m.std, ref.std);
    if (fs::exists(dir / "report.json")) {
      const json rj = read_json(dir / "report.json");
      const double t_ref = rj.at("timing").at("t_total").get<double>();
      if (out.result.timing.t_total > 0.0) rep["speedup"] = t_ref / out.result.timing.t_total;
    }
  }
  if (out.bounds && out.bounds->decision == Decision::reject) out.exit_code = kExitRejected;
  return out;
}

/// Writes the result files of a finished run into `dir`.
inline void write_outputs(const RunOutcome& out, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto os = detail::open_out(dir / "moments.csv");
    write_moments_csv(os, out.result.final);
  }
  write_json(dir / "report.json", out.report);
  write_json(dir / "timing.json", out.report.at("timing"));
  if (out.bounds) {
    auto os = detail::open_out(dir / "bounds.csv");
    write_bounds_csv(os, *out.bounds);
  }
  if (out.metamodel && out.metamodel->final_step_model)
    write_json(dir / "gp_model.json", out.metamodel->final_step_model->to_json());
  if (out.expansion) {
    auto os = detail::open_out(dir / "pc_expansion.csv");
    write_csv(os, *out.expansion, *out.basis);
  }
  if (!out.result.times.empty() && !out.result.std_history.empty()) {
    auto os = detail::open_out(dir / "history.csv");
    os << "t,spatial_mean_mean,spatial_mean_std\n";
    for (std::size_t s = 0; s < out.result.times.size(); ++s)
      os << fmt(out.result.times[s]) << ',' << fmt(spatial_mean(out.result.mean_history[s])) << ','
         << fmt(spatial_mean(out.result.std_history[s])) << '\n';
  }
}

}  // namespace muscup::harness
