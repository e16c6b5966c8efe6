#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "muscup/harness/compare.hpp"
#include "muscup/harness/config.hpp"
#include "muscup/harness/experiment.hpp"
#include "muscup/harness/plot.hpp"

using namespace muscup;
using namespace muscup::harness;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "muscup_harness_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_case1(const std::string& method) {
  return {{"model", "case1"}, {"method", method}, {"seed", 7}, {"sampling", {{"N", 60}, {"N_mu", 20}}}};
}

std::string config_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalDocumentGetsModelDefaults) {
  const auto c = parse_config({{"model", "case1"}, {"method", "mc"}});
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.sampling.N, 2000u);
  const auto m = c.case1_config();
  EXPECT_EQ(m.n_micro, 100);
  EXPECT_EQ(m.scales().macro_steps(), 20u);
  const auto d = c.input_distribution();
  EXPECT_DOUBLE_EQ(d[0].mean, rd1d::kMeanDiffusion);
  EXPECT_DOUBLE_EQ(d[1].rel_half_width, 0.1);
  EXPECT_EQ(c.effective_pc_order(), 4);
}

TEST(Config, UnknownKeyIsRejected) {
  const auto msg = config_error({{"model", "case1"}, {"method", "mc"}, {"sampels", 3}});
  EXPECT_NE(msg.find("sampels: unknown key"), std::string::npos) << msg;
}

TEST(Config, AllViolationsAreListed) {
  const auto msg = config_error({{"model", "case3"},
                                 {"method", "mc"},
                                 {"threads", 0},
                                 {"gp", {{"N_meta", 25}, {"bogus", 1}}},
                                 {"bootstrap", {{"level", 1.5}}}});
  EXPECT_NE(msg.find("4 problems"), std::string::npos) << msg;
  for (const char* part : {"model:", "threads:", "gp.bogus", "bootstrap.level"})
    EXPECT_NE(msg.find(part), std::string::npos) << part << " missing in\n" << msg;
}

TEST(Config, MissingRequiredKeys) {
  const auto msg = config_error(json::object());
  EXPECT_NE(msg.find("model: required"), std::string::npos);
  EXPECT_NE(msg.find("method: required"), std::string::npos);
}

TEST(Config, SimcPlanIsChecked) {
  auto doc = small_case1("simc");
  doc["sampling"]["N_mu"] = 100;
  EXPECT_NE(config_error(doc).find("exceeds N"), std::string::npos);
}

TEST(Config, UnstableTimeStepIsReported) {
  json doc = {{"model", "case2"}, {"method", "mc"}, {"grid", {{"nx", 64}, {"ny", 64}}},
              {"time_scales", {{"dt_macro", 100.0}, {"t_end", 1000.0}}}};
  EXPECT_NE(config_error(doc).find("CFL"), std::string::npos);
}

TEST(Config, EnvironmentOverridesThreads) {
  EXPECT_EQ(resolve_threads(1, std::nullopt, nullptr), 1);
  EXPECT_EQ(resolve_threads(1, 3, nullptr), 3);
  EXPECT_EQ(resolve_threads(1, 3, "5"), 5);
  EXPECT_THROW(resolve_threads(1, 3, "zero"), ConfigError);
}

TEST(Report, MomentsCsvRoundTrip1D) {
  MomentEstimate m;
  const Grid g = Grid::line(4, 0.25);
  m.mean = Field(g, 1.0 / 3.0);
  m.std = Field(g, 0.1);
  m.ci_mean = {Field(g, 0.2), Field(g, 0.4)};
  m.ci_std = {Field(g, 0.05), Field(g, 0.15)};
  std::stringstream ss;
  write_moments_csv(ss, m);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')),
            "x,mean,std,ci_lo_mean,ci_hi_mean,ci_lo_std,ci_hi_std");
  const fs::path dir = scratch("roundtrip1d");
  std::ofstream(dir / "moments.csv") << ss.str();
  const MomentEstimate back = read_moments_csv(dir / "moments.csv");
  EXPECT_EQ(back.mean.grid, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_EQ(back.mean[k], m.mean[k]);
    EXPECT_EQ(back.ci_std.hi[k], m.ci_std.hi[k]);
  }
}

TEST(Report, MomentsCsvRoundTrip2D) {
  const Grid g = Grid::plane(3, 2, 0.5, 0.25, 0.25, 0.125, 2);
  MomentEstimate m;
  m.mean = Field(g);
  for (std::size_t k = 0; k < g.size(); ++k) m.mean[k] = 0.1 * static_cast<double>(k);
  m.std = m.mean;
  m.ci_mean = {m.mean, m.mean};
  m.ci_std = {m.mean, m.mean};
  const fs::path dir = scratch("roundtrip2d");
  {
    std::ofstream os(dir / "moments.csv");
    write_moments_csv(os, m);
  }
  const MomentEstimate back = read_moments_csv(dir / "moments.csv");
  EXPECT_EQ(back.mean.grid, g);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(back.mean[k], m.mean[k]);
}

TEST(Report, MalformedMomentsAreRejected) {
  const fs::path dir = scratch("malformed");
  std::ofstream(dir / "moments.csv") << "x,mean\n0,1\n";
  EXPECT_THROW(read_moments_csv(dir / "moments.csv"), IoError);
}

TEST(Experiment, OutputsAreByteReproducible) {
  const auto c = parse_config(small_case1("mc"));
  const fs::path a = scratch("repro_a"), b = scratch("repro_b");
  write_outputs(run_experiment(c), a);
  auto c2 = c;
  c2.threads = 3;
  write_outputs(run_experiment(c2), b);
  EXPECT_EQ(slurp(a / "moments.csv"), slurp(b / "moments.csv"));
}

TEST(Experiment, ReportHasStableKeysAndTimingFractions) {
  const fs::path dir = scratch("keys");
  const auto r = run_experiment(parse_config(small_case1("simc")));
  write_outputs(r, dir);
  const json rep = read_json(dir / "report.json");
  for (const char* key : {"method", "decision", "mean_rel_std_error", "timing", "seed", "config"})
    EXPECT_TRUE(rep.contains(key)) << key;
  EXPECT_EQ(rep["method"], "simc");
  EXPECT_TRUE(rep["decision"].is_string());
  EXPECT_EQ(rep["seed"], 7);
  EXPECT_EQ(rep["config"]["sampling"]["N_mu"], 20);
  EXPECT_TRUE(fs::exists(dir / "timing.json"));
  EXPECT_TRUE(fs::exists(dir / "bounds.csv"));
  const TimingBreakdown t = timing_from_json(read_json(dir / "timing.json"));
  const double sum = t.micro_fraction() + t.macro_fraction() + t.overhead_fraction();
  EXPECT_GE(sum, 0.99);
  EXPECT_LE(sum, 1.0 + 1e-12);
  EXPECT_EQ(r.exit_code, rep["decision"] == "reject" ? kExitRejected : kExitSuccess);
}

TEST(Experiment, SpectralAndMetamodelRunsWriteTheirModels) {
  const fs::path gp = scratch("gp_out"), pc = scratch("pc_out");
  write_outputs(run_experiment(parse_config(small_case1("gp"))), gp);
  const GPModel model = GPModel::from_json(read_json(gp / "gp_model.json"));
  EXPECT_EQ(model.size(), 25u);
  write_outputs(run_experiment(parse_config(small_case1("galerkin"))), pc);
  const std::string csv = slurp(pc / "pc_expansion.csv");
  EXPECT_EQ(csv.substr(0, csv.find(',', csv.find(',') + 1)), "index,multi_index");
  EXPECT_EQ(read_json(pc / "report.json")["decision"], nullptr);
}

TEST(Experiment, ReferenceErrorAndSpeedup) {
  const fs::path ref = scratch("ref_run"), run = scratch("cmp_run");
  write_outputs(run_experiment(parse_config(small_case1("mc"))), ref);
  auto doc = small_case1("mc");
  doc["reference"] = ref.string();
  const auto r = run_experiment(parse_config(doc));
  EXPECT_EQ(r.report["mean_rel_std_error"].get<double>(), 0.0);
  EXPECT_TRUE(r.report["speedup"].is_number());
}

TEST(Compare, ReferenceAgainstItself) {
  const fs::path root = scratch("compare_self");
  write_outputs(run_experiment(parse_config(small_case1("mc"))), root / "mc");
  const auto rows = compare_methods(root, root / "mc");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].error, 0.0);
  EXPECT_EQ(rows[0].speedup, 1.0);
  write_comparison(rows, root / "table");
  const std::string csv = slurp(root / "table" / "comparison.csv");
  EXPECT_NE(csv.find("T_total,T_mu_pct,T_M_pct"), std::string::npos);
  EXPECT_NE(csv.find("speedup"), std::string::npos);
}

TEST(Compare, MismatchedGridsAreAnError) {
  const fs::path root = scratch("compare_mismatch");
  write_outputs(run_experiment(parse_config(small_case1("mc"))), root / "runs" / "fine");
  auto doc = small_case1("mc");
  doc["grid"] = {{"dx", 0.02}};
  write_outputs(run_experiment(parse_config(doc)), root / "coarse");
  EXPECT_THROW(compare_methods(root / "runs", root / "coarse"), ConfigError);
}

TEST(Plot, SliceInterpolatesBetweenRows) {
  const Grid g = Grid::plane(4, 8, 0.25, 0.25, 0.125, 0.125, 2);
  Field f(g);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) f[g.index(i, j, c)] = 3.0 * g.y(j) + g.x(i) + 10.0 * c;
  const auto s = slice_at_y(f, 0.625, 1);
  ASSERT_EQ(s.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(s[i], 3.0 * 0.625 + g.x(i) + 10.0, 1e-14);
}

TEST(Plot, ProfileFieldAndBarsFiles) {
  const fs::path dir = scratch("plots");
  write_outputs(run_experiment(parse_config(small_case1("simc"))), dir);
  const std::string profile = slurp(plot_profile(dir / "report.json"));
  EXPECT_EQ(profile.substr(0, profile.find('\n')),
            "x,mean,std,ci_lo_mean,ci_hi_mean,ci_lo_std,ci_hi_std,eps_std_bound,ci_hi_std_bound");
  EXPECT_TRUE(fs::exists(dir / "profile.svg"));
  const auto fields = plot_field(dir);
  ASSERT_EQ(fields.size(), 2u);
  std::ifstream in(fields[1]);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 99);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 99);
  const std::string bars = slurp(plot_bars(dir / "report.json"));
  EXPECT_NE(bars.find("simc,"), std::string::npos);
  EXPECT_THROW(parse_plot_kind("pie"), ConfigError);
}

#ifdef MUSC_UP_BIN
TEST(Cli, RunCompareAndPlot) {
  const fs::path root = scratch("cli");
  {
    std::ofstream(root / "mc.json") << small_case1("mc").dump();
    json bad = small_case1("mc");
    bad["nope"] = 1;
    std::ofstream(root / "bad.json") << bad.dump();
  }
  const std::string bin = MUSC_UP_BIN;
  auto sh = [](const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); };
  EXPECT_EQ(sh(bin + " run --config " + (root / "mc.json").string() + " --out " +
               (root / "runs" / "mc").string() + " --seed 3 --threads 2"), 0);
  EXPECT_EQ(read_json(root / "runs" / "mc" / "report.json")["seed"], 3);
  EXPECT_EQ(sh(bin + " compare --reports " + (root / "runs").string() + " --reference " +
               (root / "runs" / "mc").string() + " --out " + (root / "cmp").string()), 0);
  EXPECT_TRUE(fs::exists(root / "cmp" / "comparison.json"));
  EXPECT_EQ(sh(bin + " plot --report " + (root / "cmp" / "comparison.json").string() + " --kind bars"), 0);
  EXPECT_NE(sh(bin + " run --config " + (root / "bad.json").string() + " --out " + (root / "x").string()), 0);
  EXPECT_NE(sh(bin + " plot --report " + (root / "runs" / "mc").string() + " --kind pie"), 0);
}
#endif

TEST(Experiment, FiveMethodsAgreeOnCaseOne) {
  std::vector<std::pair<std::string, Field>> stds;
  for (const char* method : {"mc", "simc", "gp", "coupled-pc", "galerkin"}) {
    json doc = {{"model", "case1"}, {"method", method}, {"seed", 42},
                {"sampling", {{"N", 2000}, {"N_mu", 50}}}};
    const auto r = run_experiment(parse_config(doc));
    if (std::string(method) == "simc") EXPECT_EQ(r.report["decision"], "accept");
    stds.emplace_back(method, r.result.final.std);
  }
  for (std::size_t a = 0; a < stds.size(); ++a)
    for (std::size_t b = a + 1; b < stds.size(); ++b)
      EXPECT_LE(mean_relative_error(stds[a].second, stds[b].second), 0.01)
          << stds[a].first << " vs " << stds[b].first;
}
