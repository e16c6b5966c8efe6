#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "muscup/core/coupling.hpp"
#include "muscup/models/gray_scott.hpp"
#include "muscup/models/reaction_diffusion_1d.hpp"

using namespace muscup;
using std::numbers::pi;

namespace {

double rel_sum_diff(std::span<const double> a, std::span<const double> b) {
  double sa = 0, sb = 0, scale = 0;
  for (double x : a) sa += x, scale += std::abs(x);
  for (double x : b) sb += x;
  return std::abs(sa - sb) / scale;
}

Field transpose(const Field& f) {
  Field t(f.grid);
  const Grid& g = f.grid;
  for (std::size_t c = 0; c < g.components; ++c)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        t[g.index(j, i, c)] = f[g.index(i, j, c)];
  return t;
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Init1D, PointValues) {
  EXPECT_NEAR(rd1d::initial_value(0.125), 1.0, 1e-15);
  EXPECT_NEAR(rd1d::initial_value(0.0), 0.0, 1e-15);
}

TEST(Init1D, GridExtremes) {
  const Field f = rd1d::init_1d(rd1d::make_grid(1e-2));
  ASSERT_EQ(f.size(), 100u);
  const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  EXPECT_NEAR(*lo, 0.0, 1e-14);
  EXPECT_NEAR(*hi, 2.0, 1e-14);
  EXPECT_EQ(lo - f.values.begin(), 0);
  EXPECT_NEAR(f[25], 2.0, 1e-14);
}

TEST(Diffusion1D, UniformUnchanged) {
  const Grid g = rd1d::make_grid(1e-2);
  const Field f(g, 3.5);
  EXPECT_EQ(rd1d::diffusion_step_1d(f, {0.4, 0.0}, 1e-5), f);
}

TEST(Diffusion1D, ConservesSum) {
  const Grid g = rd1d::make_grid(1e-2);
  Field f(g);
  for (std::size_t i = 0; i < g.nx; ++i) f[i] = std::exp(std::sin(7.0 * i)) + i * 0.01;
  Field next = f;
  for (int s = 0; s < 50; ++s) next = rd1d::diffusion_step_1d(next, {0.45, 0.0}, 1e-4);
  EXPECT_LT(rel_sum_diff(f.values, next.values), 1e-12);
}

TEST(Diffusion1D, FourierModeMultiplier) {
  const Grid g = rd1d::make_grid(1e-2);
  const double d = 0.4, dt = 1e-4;
  const double r = d * dt / (g.dx * g.dx);
  for (int j : {1, 3, 17, 50}) {
    Field f(g);
    for (std::size_t i = 0; i < g.nx; ++i) f[i] = std::cos(2 * pi * j * g.x(i));
    const Field out = rd1d::diffusion_step_1d(f, {d, 0.0}, dt);
    const double s = std::sin(pi * j * g.dx);
    const double factor = 1.0 - 4.0 * r * s * s;
    for (std::size_t i = 0; i < g.nx; ++i)
      EXPECT_NEAR(out[i], factor * f[i], 1e-13) << "mode " << j;
  }
}

TEST(Diffusion1D, CflViolationReportsNumber) {
  const Grid g = rd1d::make_grid(1e-2);
  try {
    rd1d::diffusion_step_1d(Field(g, 1.0), {1.0, 0.0}, 1e-4);
    FAIL();
  } catch (const CflError& e) {
    EXPECT_NEAR(e.cfl(), 1.0, 1e-12);
  }
}

TEST(Reaction1D, Examples) {
  const Grid g = Grid::line(3, 1.0);
  const Field one(g, 1.0);
  EXPECT_EQ(rd1d::reaction_micro_1d(one, {1.0, 0.0}, 0.1, 7), one);
  const Field two = rd1d::reaction_micro_1d(one, {1.0, 1.0}, 0.1, 2);
  EXPECT_NEAR(two[0], 1.21, 1e-15);
  const Field hundred = rd1d::reaction_micro_1d(one, {1.0, 0.0405}, 1.0, 100);
  EXPECT_NEAR(hundred[1] / std::pow(1.0405, 100), 1.0, 1e-13);
  EXPECT_THROW(rd1d::reaction_micro_1d(one, {1.0, 20.0}, 0.1, 1), ConfigError);
}

TEST(Reaction1D, MeanRateMatchesCellTimescale) {
  EXPECT_NEAR(rd1d::mean_reaction(100, 1e-2), 405000.0, 1e-6);
  const auto cfg = rd1d::ModelConfig1D::defaults(100);
  EXPECT_NEAR(rd1d::mean_reaction(100, 1e-2) * cfg.t_end, 1.0, 1e-12);
  EXPECT_NO_THROW(cfg.validate(0.405 * 1.1));
}

TEST(Analytic1D, InitialAndPureGrowth) {
  for (double x : {0.0, 0.13, 0.5, 0.77})
    EXPECT_NEAR(rd1d::analytic_solution_1d(x, 0.0, {0.3, 5.0}),
                rd1d::initial_value(x), 1e-14);
  EXPECT_NEAR(rd1d::analytic_solution_1d(0.125, 0.3, {0.0, 2.0}),
              std::exp(0.6), 1e-14);
}

TEST(Analytic1D, SplittingConvergesAtFirstOrder) {
  const std::vector<double> xi{rd1d::kMeanDiffusion, rd1d::mean_reaction(100, 1e-2)};
  const auto p = rd1d::Params1D::from_inputs(xi);
  const auto base = rd1d::ModelConfig1D::defaults(100);
  std::vector<double> errors;
  for (int refine : {1, 2, 4}) {
    auto cfg = base;
    cfg.dt_macro = base.dt_macro / refine;
    const rd1d::ReactionDiffusion1D model(cfg);
    const auto traj = run_coupled(model, xi, History::final_only);
    double err = 0, norm = 0;
    for (std::size_t i = 0; i < model.grid().nx; ++i) {
      const double exact = rd1d::analytic_solution_1d(model.grid().x(i), cfg.t_end, p);
      err = std::max(err, std::abs(traj.final_state()[i] - exact));
      norm = std::max(norm, std::abs(exact));
    }
    errors.push_back(err / norm);
  }
  EXPECT_LT(errors[1], errors[0]);
  EXPECT_LT(errors[2], errors[1]);
  EXPECT_NEAR(errors[0] / errors[1], 2.0, 0.15);
  EXPECT_NEAR(errors[1] / errors[2], 2.0, 0.15);
}

TEST(GrayScottInit, PointValues) {
  auto [u1, v1] = gs::initial_value(1.25, 1.25);
  EXPECT_NEAR(v1, 0.0, 1e-15);
  EXPECT_NEAR(u1, 1.0, 1e-15);
  auto [u2, v2] = gs::initial_value(0.5, 0.5);
  EXPECT_EQ(u2, 0.0);
  EXPECT_EQ(v2, 0.0);
  auto [u3, v3] = gs::initial_value(1.125, 1.125);
  EXPECT_NEAR(v3, 0.25, 1e-15);
  EXPECT_NEAR(u3, 0.5, 1e-15);
}

TEST(GrayScottInit, GridMaximum) {
  // 30 cells of width 1/12: centers hit the sine maxima (x = 1/8 + m/4).
  gs::GSConfig cfg;
  cfg.nx = cfg.ny = 30;
  const Field f = gs::gs_init(gs::make_grid(cfg));
  const auto v = f.component(1);
  EXPECT_NEAR(*std::max_element(v.begin(), v.end()), 0.25, 1e-14);
}

TEST(GrayScottDiffusion, UniformUnchangedAndConservative) {
  auto cfg = gs::GSConfig::desk();
  const Grid g = gs::make_grid(cfg);
  const Field flat(g, 0.7);
  EXPECT_EQ(gs::gs_diffusion_step(flat, {}, cfg.dt_macro), flat);

  Field f = gs::gs_init(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += 0.1 * std::sin(0.37 * i);
  Field next = f;
  for (int s = 0; s < 100; ++s) next = gs::gs_diffusion_step(next, {}, cfg.dt_macro);
  for (std::size_t c = 0; c < 2; ++c)
    EXPECT_LT(rel_sum_diff(f.component(c), next.component(c)), 1e-12);
}

TEST(GrayScottDiffusion, CflViolation) {
  auto cfg = gs::GSConfig::desk();
  const Grid g = gs::make_grid(cfg);
  EXPECT_THROW(gs::gs_diffusion_step(Field(g, 1.0), {}, 1000.0), CflError);
  cfg.dt_macro = 1000.0;
  cfg.t_end = 5000.0;
  EXPECT_THROW(cfg.validate(), CflError);
}

TEST(GrayScottReaction, FixedPointIsExact) {
  const Grid g = Grid::plane(4, 4, 1.0, 1.0, 0.5, 0.5, 2);
  Field f(g);
  for (auto& x : f.component(0)) x = 1.0;
  for (double F : {0.01, 0.0385, 0.09})
    for (double k : {0.03, 0.052, 0.07})
      EXPECT_EQ(gs::gs_reaction_micro(f, {F, k, gs::kDu, gs::kDv}, 2.0, 3), f);
}

TEST(GrayScottReaction, DecoupledBranch) {
  const Grid g = Grid::plane(2, 2, 1.0, 1.0, 0.5, 0.5, 2);
  Field f(g);
  for (auto& x : f.component(0)) x = 0.5;
  const gs::GSParams p;
  const Field out = gs::gs_reaction_micro(f, p, 0.5, 1);
  EXPECT_NEAR(out[0], 0.5 + 0.5 * p.F * 0.5, 1e-15);
  for (double v : out.component(1)) EXPECT_EQ(v, 0.0);
}

TEST(GrayScottReaction, SingleEulerStep) {
  const Grid g = Grid::plane(1, 1, 1.0, 1.0, 0.5, 0.5, 2);
  const Field f(g, 0.5);
  const Field out = gs::gs_reaction_micro(f, {0.0385, 0.052, gs::kDu, gs::kDv}, 0.1, 1);
  EXPECT_NEAR(out[0], 0.489425, 1e-14);
  EXPECT_NEAR(out[1], 0.507975, 1e-14);
}

TEST(GrayScottReaction, NonFiniteNamesCell) {
  const Grid g = Grid::plane(3, 2, 1.0, 1.0, 0.5, 0.5, 2);
  Field f(g, 0.0);
  f[g.index(2, 1, 0)] = 1e150;
  f[g.index(2, 1, 1)] = 1e150;
  try {
    gs::gs_reaction_micro(f, {}, 1.0, 3);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("(2, 1)"), std::string::npos) << e.what();
  }
}

TEST(GrayScott, TrajectoryStaysSymmetric) {
  auto cfg = gs::GSConfig::desk();
  cfg.t_end = 600.0;
  const gs::GrayScott model(cfg);
  const Field init = model.initial_state();
  ASSERT_LT(max_abs_diff(init, transpose(init)), 1e-15);
  const std::vector<double> xi{gs::kMeanFeed * 1.004, gs::kMeanRate * 0.997};
  const auto traj = run_coupled(model, xi);
  for (const Field& s : traj.states) EXPECT_LT(max_abs_diff(s, transpose(s)), 1e-10);
}
