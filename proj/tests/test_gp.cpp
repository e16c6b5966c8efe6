#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "muscup/gp/gp.hpp"
#include "muscup/gp/metamodel.hpp"
#include "muscup/models/reaction_diffusion_1d.hpp"
#include "muscup/uq/monte_carlo.hpp"

using namespace muscup;

namespace {

Field scalar(double v) { return Field(Grid::line(1, 1.0), std::vector<double>{v}); }

double smooth(double x, double y) { return std::sin(1.3 * x) + 0.4 * y * y - 0.2 * x * y; }

struct Design {
  Eigen::MatrixXd x;
  std::vector<Field> y;
};

Design grid_design(int m) {
  Design d;
  d.x.resize(m * m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double a = -1 + 2.0 * i / (m - 1), b = -1 + 2.0 * j / (m - 1);
      d.x(i * m + j, 0) = a;
      d.x(i * m + j, 1) = b;
      d.y.push_back(Field(Grid::line(2, 1.0), std::vector<double>{smooth(a, b), 3 * smooth(a, b) + 1}));
    }
  return d;
}

}  // namespace

TEST(GaussianProcess, TwoPointClosedForm) {
  const double l = 0.7, s2 = 1.3, nu = 1e-8;
  Eigen::MatrixXd x(2, 1);
  x << -0.4, 0.5;
  GPConfig cfg;
  cfg.nugget = nu;
  cfg.fixed = GPHyperparameters{{l}, s2};
  const std::vector<Field> y{scalar(2.0), scalar(-1.0)};
  const auto gp = fit_gp(x, y, cfg);

  const double a = s2 + nu, b = s2 * std::exp(-0.5 * std::pow(0.9 / l, 2));
  const double det = a * a - b * b;
  for (double q : {-1.0, -0.4, 0.0, 0.3, 1.2}) {
    const double k1 = s2 * std::exp(-0.5 * std::pow((q + 0.4) / l, 2));
    const double k2 = s2 * std::exp(-0.5 * std::pow((q - 0.5) / l, 2));
    const double w1 = (a * k1 - b * k2) / det, w2 = (-b * k1 + a * k2) / det;
    const double mean = 0.5 + w1 * 1.5 + w2 * (-1.5);
    const double var = s2 + nu - (k1 * w1 + k2 * w2);
    const std::vector<double> z{q};
    EXPECT_NEAR(gp.predict(z).mean[0], mean, 1e-10) << q;
    EXPECT_NEAR(gp.latent_variance(z), var, 1e-10) << q;
  }
}

TEST(GaussianProcess, FarFieldRevertsToPrior) {
  auto d = grid_design(3);
  GPConfig cfg;
  cfg.fixed = GPHyperparameters{{0.5, 0.8}, 2.0};
  const auto gp = fit_gp(d.x, d.y, cfg);
  const std::vector<double> far{20.0, -30.0};
  const auto p = gp.predict(far);
  EXPECT_NEAR(p.mean[0], gp.prior_mean()[0], 1e-12);
  EXPECT_NEAR(gp.latent_variance(far), 2.0 + gp.nugget(), 1e-12);
}

TEST(GaussianProcess, FitsTrainingTargets) {
  const auto d = grid_design(4);
  const auto gp = fit_gp(d.x, d.y, GPConfig{});
  const double tol = 3 * std::sqrt(gp.nugget()) * std::max(1.0, gp.output_scale());
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    const std::vector<double> z{d.x(i, 0), d.x(i, 1)};
    const auto p = gp.predict(z);
    EXPECT_NEAR(p.mean[0], d.y[i][0], tol);
    EXPECT_NEAR(p.mean[1], d.y[i][1], tol);
    EXPECT_GE(p.variance[0], 0.0);
  }
}

TEST(GaussianProcess, ConstantOutputs) {
  auto d = grid_design(3);
  for (auto& f : d.y) f = Field(f.grid, 4.5);
  GPConfig cfg;
  const auto gp = fit_gp(d.x, d.y, cfg);
  for (double a : {-0.9, -0.2, 0.4})
    for (double b : {-0.7, 0.1, 0.8}) {
      const std::vector<double> z{a, b};
      const auto p = gp.predict(z);
      EXPECT_NEAR(p.mean[0], 4.5, 1e-12);
      EXPECT_LE(p.variance[0], cfg.nugget);
    }
}

TEST(GaussianProcess, ReflectionInvariance) {
  auto d = grid_design(3);
  GPConfig cfg;
  cfg.fixed = GPHyperparameters{{0.6, 0.9}, 1.1};
  const auto gp = fit_gp(d.x, d.y, cfg);
  Eigen::MatrixXd flipped = d.x;
  flipped.col(0) *= -1.0;
  const auto gp_flipped = fit_gp(flipped, d.y, cfg);
  const std::vector<double> z{0.37, -0.21}, zr{-0.37, -0.21};
  EXPECT_NEAR(gp.predict(z).mean[0], gp_flipped.predict(zr).mean[0], 1e-12);
  EXPECT_NEAR(gp.latent_variance(z), gp_flipped.latent_variance(zr), 1e-12);
  const std::vector<double> origin{0.0, 0.0};
  // Symmetric design: the symmetry point predicts identically under either.
  EXPECT_NEAR(gp.latent_variance(origin), gp_flipped.latent_variance(origin), 1e-12);
}

TEST(GaussianProcess, ExplicitInverseOracle) {
  Eigen::MatrixXd x(5, 2);
  x << -0.8, -0.5, 0.1, 0.9, 0.6, -0.3, -0.2, 0.2, 0.9, 0.7;
  std::vector<Field> y;
  for (int i = 0; i < 5; ++i) y.push_back(scalar(smooth(x(i, 0), x(i, 1))));
  const GPHyperparameters h{{0.9, 0.6}, 1.7};
  GPConfig cfg;
  cfg.nugget = 1e-6;
  cfg.fixed = h;
  const auto gp = fit_gp(x, y, cfg);

  Eigen::MatrixXd K(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double r0 = (x(i, 0) - x(j, 0)) / 0.9, r1 = (x(i, 1) - x(j, 1)) / 0.6;
      K(i, j) = 1.7 * std::exp(-0.5 * (r0 * r0 + r1 * r1)) + (i == j ? 1e-6 : 0.0);
    }
  const Eigen::MatrixXd Kinv = K.fullPivLu().inverse();
  double ybar = 0;
  for (const auto& f : y) ybar += f[0] / 5;
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 10; ++b) {
      const double q0 = -1 + 0.2 * a, q1 = -1 + 0.2 * b;
      Eigen::VectorXd k(5), yc(5);
      for (int i = 0; i < 5; ++i) {
        const double r0 = (q0 - x(i, 0)) / 0.9, r1 = (q1 - x(i, 1)) / 0.6;
        k(i) = 1.7 * std::exp(-0.5 * (r0 * r0 + r1 * r1));
        yc(i) = y[i][0] - ybar;
      }
      const std::vector<double> z{q0, q1};
      EXPECT_NEAR(gp.predict(z).mean[0], ybar + k.dot(Kinv * yc), 1e-8);
      EXPECT_NEAR(gp.latent_variance(z), 1.7 + 1e-6 - k.dot(Kinv * k), 1e-8);
    }
}

TEST(GaussianProcess, OptimizerNeverEndsBelowItsStarts) {
  const auto d = grid_design(4);
  GramAccumulator acc(d.y.size());
  acc.add(d.y);
  GPConfig cfg;
  cfg.seed = 13;
  const auto fit = optimize_hyperparameters(d.x, acc, cfg);
  ASSERT_EQ(fit.start_log_likelihoods.size(), 5u);
  for (double s : fit.start_log_likelihoods) EXPECT_GE(fit.log_likelihood, s);
  EXPECT_LE(fit.evaluations, 5 * 200);
  const auto again = optimize_hyperparameters(d.x, acc, cfg);
  EXPECT_EQ(again.hyper.lengthscales, fit.hyper.lengthscales);
  EXPECT_EQ(again.hyper.signal_variance, fit.hyper.signal_variance);
}

TEST(GaussianProcess, NuggetEscalatesThenFails) {
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 1e-7, 1.0;
  GPConfig cfg;
  cfg.nugget = 1e-16;
  cfg.fixed = GPHyperparameters{{100.0}, 1e4};
  const std::vector<Field> y{scalar(1), scalar(1), scalar(2)};
  const auto gp = fit_gp(x, y, cfg);
  EXPECT_GT(gp.nugget(), cfg.nugget);
  EXPECT_LE(gp.nugget(), kMaxNugget * (1 + 1e-9));

  Eigen::MatrixXd dup(2, 1);
  dup << 0.3, 0.3;
  EXPECT_THROW(fit_gp(dup, std::vector<Field>{scalar(1), scalar(2)}, cfg),
               SingularSystemError);
}

TEST(GaussianProcess, JsonRoundTrip) {
  const auto d = grid_design(3);
  const auto gp = fit_gp(d.x, d.y, GPConfig{});
  const auto restored = GPModel::from_json(nlohmann::json::parse(gp.to_json().dump()));
  const std::vector<double> z{0.31, -0.77};
  EXPECT_EQ(restored.predict(z).mean, gp.predict(z).mean);
  EXPECT_EQ(restored.hyperparameters().lengthscales, gp.hyperparameters().lengthscales);
  EXPECT_DOUBLE_EQ(restored.latent_variance(z), gp.latent_variance(z));
}

TEST(TrainingDesign, TensorGridAndMaximin) {
  const auto tensor = gp_training_design(2, 25, 0);
  EXPECT_EQ(tensor.rows(), 25);
  EXPECT_DOUBLE_EQ(tensor.minCoeff(), -1.0);
  EXPECT_DOUBLE_EQ(tensor.maxCoeff(), 1.0);
  const auto mm = gp_training_design(2, 20, 4);
  EXPECT_EQ(mm.rows(), 20);
  EXPECT_LE(mm.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Metamodel, TrainingOnSamplesApproachesMonteCarlo) {
  const rd1d::ReactionDiffusion1D model(rd1d::ModelConfig1D::defaults(100));
  const InputDistribution dist({{rd1d::kMeanDiffusion, 0.1},
                                {rd1d::mean_reaction(100, 1e-2), 0.1}});
  MetamodelOptions opts;
  opts.design = GPDesign::sample_points;
  opts.gp.nugget = 1e-12;
  const auto gp = run_metamodel_up(model, dist, 40, 6, opts);
  const auto mc = run_mc(model, dist, 40, 6);
  EXPECT_LT(mean_relative_error(gp.estimate.final.std, mc.final.std), 1e-5);
  EXPECT_LT(mean_relative_error(gp.estimate.final.mean, mc.final.mean), 1e-8);
}

TEST(Metamodel, TensorDesignTracksMonteCarlo) {
  const rd1d::ReactionDiffusion1D model(rd1d::ModelConfig1D::defaults(100));
  const InputDistribution dist({{rd1d::kMeanDiffusion, 0.1},
                                {rd1d::mean_reaction(100, 1e-2), 0.1}});
  const auto gp = run_metamodel_up(model, dist, 300, 2);
  const auto mc = run_mc(model, dist, 300, 2);
  EXPECT_LT(mean_relative_error(gp.estimate.final.std, mc.final.std), 1e-3);
  ASSERT_TRUE(gp.final_step_model.has_value());
  EXPECT_EQ(gp.final_step_model->size(), 25u);
  EXPECT_GT(gp.estimate.timing.t_overhead, 0.0);
}
