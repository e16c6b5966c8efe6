// musc-up: run, compare and plot uncertainty propagation experiments.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "muscup/harness/compare.hpp"
#include "muscup/harness/experiment.hpp"
#include "muscup/harness/plot.hpp"

namespace mh = muscup::harness;

namespace {

int cmd_run(const std::string& config_path, std::string out, std::optional<std::uint64_t> seed,
            std::optional<int> threads) {
  mh::ExperimentConfig cfg = mh::load_config(config_path);
  if (seed) {
    cfg.seed = *seed;
    cfg.gp.seed = *seed;
    cfg.bootstrap.seed = *seed ^ 0xb5ad4eceda1ce2a9ULL;
  }
  cfg.threads = mh::resolve_threads(cfg.threads, threads, std::getenv("MUSC_UP_THREADS"));
  if (out.empty()) out = cfg.output_dir;
  if (out.empty()) throw muscup::ConfigError("no output directory: pass --out or set output_dir");

  const mh::RunOutcome r = mh::run_experiment(cfg);
  mh::write_outputs(r, out);
  const auto& rep = r.report;
  std::cout << rep["method"].get<std::string>() << " on " << rep["model"].get<std::string>()
            << ": T_total " << r.result.timing.t_total << " s";
  if (rep["decision"].is_string()) std::cout << ", interpolation test " << rep["decision"].get<std::string>();
  if (rep["mean_rel_std_error"].is_number())
    std::cout << ", mean rel std error " << rep["mean_rel_std_error"].get<double>();
  std::cout << "\nresults in " << out << '\n';
  if (r.exit_code == mh::kExitRejected)
    std::cerr << "interpolation test rejected; reported the N_mu-sample MC estimate\n";
  return r.exit_code;
}

int cmd_compare(const std::string& reports, const std::string& reference, const std::string& out) {
  const auto rows = mh::compare_methods(reports, reference);
  mh::write_comparison(rows, out);
  std::cout << "label,method,error,T_total,T_mu%,T_M%,speedup\n";
  for (const auto& r : rows)
    std::cout << r.label << ',' << r.method << ',' << r.error << ',' << r.timing.t_total << ','
              << 100.0 * r.timing.micro_fraction() << ',' << 100.0 * r.timing.macro_fraction()
              << ',' << r.speedup << '\n';
  return mh::kExitSuccess;
}

int cmd_plot(const std::string& report, const std::string& kind) {
  switch (mh::parse_plot_kind(kind)) {
    case mh::PlotKind::profile:
      std::cout << mh::plot_profile(report).string() << '\n';
      break;
    case mh::PlotKind::field:
      for (const auto& p : mh::plot_field(report)) std::cout << p.string() << '\n';
      break;
    case mh::PlotKind::bars:
      std::cout << mh::plot_bars(report).string() << '\n';
      break;
  }
  return mh::kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale uncertainty propagation experiments"};
  app.require_subcommand(1);

  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  auto* run = app.add_subcommand("run", "run one configured experiment");
  run->add_option("--config", config, "experiment configuration (JSON)")->required();
  run->add_option("--out", out, "output directory");
  run->add_option("--seed", seed, "override the configured seed");
  run->add_option("--threads", threads, "worker threads (MUSC_UP_THREADS takes precedence)");

  std::string reports, reference, cmp_out;
  auto* cmp = app.add_subcommand("compare", "tabulate stored runs against a reference");
  cmp->add_option("--reports", reports, "directory of run directories")->required();
  cmp->add_option("--reference", reference, "reference run (directory, report.json or moments.csv)")->required();
  cmp->add_option("--out", cmp_out, "output directory")->required();

  std::string report, kind;
  auto* plot = app.add_subcommand("plot", "extract plot data from a stored run");
  plot->add_option("--report", report, "run directory, report.json or comparison.json")->required();
  plot->add_option("--kind", kind, "profile, field or bars")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mh::kExitFailure;
  }

  try {
    if (*run) return cmd_run(config, out, seed, threads);
    if (*cmp) return cmd_compare(reports, reference, cmp_out);
    return cmd_plot(report, kind);
  } catch (const std::exception& e) {
    std::cerr << "musc-up: " << e.what() << '\n';
    return mh::kExitFailure;
  }
}
