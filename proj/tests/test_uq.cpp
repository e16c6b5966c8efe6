#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "muscup/models/reaction_diffusion_1d.hpp"
#include "muscup/uq/monte_carlo.hpp"
#include "oracles.hpp"

using namespace muscup;

namespace {

std::vector<Field> scalars(std::initializer_list<double> xs) {
  std::vector<Field> out;
  for (double x : xs) out.emplace_back(Grid::line(1, 1.0), std::vector<double>{x});
  return out;
}

InputDistribution case1_dist(int n_micro = 100) {
  return InputDistribution({{rd1d::kMeanDiffusion, 0.1},
                            {rd1d::mean_reaction(n_micro, 1e-2), 0.1}});
}

}  // namespace

TEST(Random, CounterStreamIsStateless) {
  EXPECT_EQ(counter_uniform(7, 3, 1), counter_uniform(7, 3, 1));
  EXPECT_NE(counter_uniform(7, 3, 1), counter_uniform(7, 3, 0));
  EXPECT_NE(counter_uniform(7, 3, 1), counter_uniform(8, 3, 1));
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = counter_uniform(1, i, 0);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(counter_index(1, i, 2, 13), 13u);
  }
}

TEST(Distribution, RejectsInvalidWidth) {
  EXPECT_THROW(InputDistribution({{1.0, 1.0}}), ConfigError);
  EXPECT_THROW(InputDistribution({{1.0, -0.1}}), ConfigError);
  EXPECT_NO_THROW(InputDistribution({{1.0, 0.0}}));
}

TEST(DrawSamples, EmptyAndBounds) {
  const InputDistribution dist({{0.0385, 0.01}, {0.052, 0.01}});
  EXPECT_EQ(draw_samples(dist, 0, 1).size(), 0u);
  const auto s = draw_samples(dist, 5000, 42);
  for (std::size_t j = 0; j < s.size(); ++j) {
    EXPECT_GE(s.inputs(j, 0), 0.038115 - 1e-15);
    EXPECT_LE(s.inputs(j, 0), 0.038885 + 1e-15);
    EXPECT_TRUE(dist.contains(s.row(j)));
  }
}

TEST(DrawSamples, DeterministicAndPrefixStable) {
  const auto dist = case1_dist();
  const auto a = draw_samples(dist, 300, 9);
  const auto b = draw_samples(dist, 300, 9);
  EXPECT_EQ(a.inputs, b.inputs);
  const auto prefix = draw_samples(dist, 120, 9);
  EXPECT_EQ(prefix.inputs, a.inputs.topRows(120));
  EXPECT_NE(draw_samples(dist, 300, 10).inputs, a.inputs);
}

TEST(ReferenceCoordinates, SkipsDegenerateDimensions) {
  const InputDistribution dist({{2.0, 0.5}, {3.0, 0.0}});
  RowMatrix x(2, 2);
  x << 1.0, 3.0, 3.0, 3.0;
  const auto z = reference_coordinates(dist, x);
  ASSERT_EQ(z.cols(), 1);
  EXPECT_DOUBLE_EQ(z(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(z(1, 0), 1.0);
}

TEST(Moments, TwoPointFormula) {
  const auto m = estimate_moments(scalars({1.0, 3.0}));
  EXPECT_DOUBLE_EQ(m.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(m.std[0], std::sqrt(2.0));
}

TEST(Moments, EqualOutputsGiveZeroStd) {
  const auto m = estimate_moments(scalars({0.1, 0.1, 0.1, 0.1}));
  EXPECT_EQ(m.std[0], 0.0);
}

TEST(Moments, SingleSampleStdIsAnError) {
  EXPECT_THROW(estimate_moments(scalars({1.0})), ConfigError);
  EXPECT_THROW(estimate_moments(std::vector<Field>{}), ConfigError);
}

TEST(Bootstrap, ConstantDataGivesZeroWidth) {
  const auto data = scalars({4.0, 4.0, 4.0, 4.0, 4.0});
  for (auto est : {Estimator::mean, Estimator::std}) {
    const auto ci = bootstrap_ci(data, est, 0.95, 200, 3);
    EXPECT_EQ(ci.lo[0], ci.hi[0]);
  }
}

TEST(Bootstrap, Preconditions) {
  EXPECT_THROW(bootstrap_ci(scalars({1.0}), Estimator::mean, 0.95, 1000, 1), ConfigError);
  EXPECT_THROW(bootstrap_ci(scalars({1.0, 2.0}), Estimator::mean, 0.95, 50, 1), ConfigError);
}

TEST(Bootstrap, IntervalsContainEstimates) {
  std::vector<Field> data;
  for (std::size_t j = 0; j < 40; ++j) {
    Field f(Grid::line(8, 1.0));
    for (std::size_t i = 0; i < 8; ++i) f[i] = std::pow(counter_uniform(5, j, i), 3.0 + i);
    data.push_back(f);
  }
  const auto m = estimate_moments(data, BootstrapConfig{1000, 0.95, 11});
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_LE(m.ci_mean.lo[i], m.mean[i]);
    EXPECT_GE(m.ci_mean.hi[i], m.mean[i]);
    EXPECT_LE(m.ci_std.lo[i], m.std[i]);
    EXPECT_GE(m.ci_std.hi[i], m.std[i]);
    EXPECT_GE(m.std[i], 0.0);
  }
}

TEST(Bootstrap, WidthShrinksLikeInverseSqrtN) {
  auto mean_width = [](std::size_t N) {
    double total = 0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      std::vector<Field> data;
      for (std::size_t j = 0; j < N; ++j)
        data.emplace_back(Grid::line(1, 1.0),
                          std::vector<double>{counter_uniform(100 + trial, j, 0)});
      const auto ci = bootstrap_ci(data, Estimator::mean, 0.95, 500, trial);
      total += ci.hi[0] - ci.lo[0];
    }
    return total / 20;
  };
  const double ratio = mean_width(100) / mean_width(400);
  EXPECT_NEAR(ratio, 2.0, 0.4);
}

TEST(Bootstrap, CoverageOfUniformMean) {
  int covered = 0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) {
    std::vector<Field> data;
    for (std::size_t j = 0; j < 200; ++j)
      data.emplace_back(Grid::line(1, 1.0),
                        std::vector<double>{counter_uniform(77, static_cast<std::uint64_t>(t), j)});
    const auto ci = bootstrap_ci(data, Estimator::mean, 0.95, 1000, static_cast<std::uint64_t>(t));
    if (ci.lo[0] <= 0.5 && 0.5 <= ci.hi[0]) ++covered;
  }
  const double rate = static_cast<double>(covered) / trials;
  EXPECT_GE(rate, 0.92);
  EXPECT_LE(rate, 0.98);
}

TEST(RelativeError, FloorAndSelfComparison) {
  const Grid g = Grid::line(3, 1.0);
  const Field ref(g, std::vector<double>{1.0, 0.0, 2.0});
  const Field val(g, std::vector<double>{1.1, 5.0, 2.0});
  EXPECT_NEAR(mean_relative_error(val, ref), 0.05, 1e-15);
  EXPECT_EQ(mean_relative_error(ref, ref), 0.0);
}

TEST(MonteCarlo, SingleSampleStdIsAnError) {
  const rd1d::ReactionDiffusion1D model(rd1d::ModelConfig1D::defaults(100));
  EXPECT_THROW(run_mc(model, case1_dist(), 1, 1), ConfigError);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
  const rd1d::ReactionDiffusion1D model(rd1d::ModelConfig1D::defaults(100));
  MethodOptions one, four;
  four.threads = 4;
  const auto a = run_mc(model, case1_dist(), 200, 5, one);
  const auto b = run_mc(model, case1_dist(), 200, 5, four);
  EXPECT_EQ(a.final.mean, b.final.mean);
  EXPECT_EQ(a.final.std, b.final.std);
  EXPECT_EQ(a.final.ci_std.lo, b.final.ci_std.lo);
  ASSERT_EQ(a.std_history.size(), b.std_history.size());
  EXPECT_EQ(a.std_history.back(), b.std_history.back());
}

TEST(MonteCarlo, SolverErrorNamesSample) {
  struct Scaling {
    TimeScales scales() const { return TimeScales::from_macro(1.0, 1, 3.0); }
    Field initial_state() const { return Field(Grid::line(2, 1.0), 1.0); }
    Field micro(const Field& s, std::span<const double> xi) const {
      Field v = s;
      for (auto& x : v.values) x *= xi[0];
      return v;
    }
    Field macro(const Field&, const Field& v, std::span<const double>) const {
      return v;
    }
  };
  const InputDistribution dist({{1e200, 0.5}});
  try {
    run_mc(Scaling{}, dist, 4, 1);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.step(), 2u);
    EXPECT_EQ(e.sample(), 0);
    EXPECT_EQ(e.params().size(), 1u);
  }
}

TEST(MonteCarlo, MatchesAnalyticQuadrature) {
  const rd1d::ReactionDiffusion1D model(rd1d::ModelConfig1D::defaults(100));
  const auto dist = case1_dist();
  MethodOptions opts;
  opts.threads = 2;
  opts.keep_history = false;
  const auto r = run_mc(model, dist, 2000, 42, opts);
  const auto ref = oracle::case1_quadrature(dist, model.grid(), model.scales().t_end);
  std::size_t mean_in = 0, std_in = 0;
  const std::size_t m = model.grid().nx;
  for (std::size_t i = 0; i < m; ++i) {
    mean_in += r.final.ci_mean.lo[i] <= ref.mean[i] && ref.mean[i] <= r.final.ci_mean.hi[i];
    std_in += r.final.ci_std.lo[i] <= ref.std[i] && ref.std[i] <= r.final.ci_std.hi[i];
  }
  EXPECT_GE(mean_in, static_cast<std::size_t>(0.95 * m));
  EXPECT_GE(std_in, static_cast<std::size_t>(0.95 * m));
  EXPECT_EQ(r.times.size(), 21u);
  EXPECT_GT(r.timing.t_micro, 0.0);
  EXPECT_GT(r.timing.t_macro, 0.0);
  EXPECT_LE(r.timing.t_micro + r.timing.t_macro + r.timing.t_overhead,
            r.timing.t_total * (1 + 1e-6));
}
