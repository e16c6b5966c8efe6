#pragma once

// Gaussian-process regression with an anisotropic squared-exponential kernel
//   k(z, z') = s^2 exp(-1/2 sum_i ((z_i - z'_i) / l_i)^2)
// and shared hyperparameters across all output components. Outputs are
// centered per component and scaled by one RMS factor per block; the
// hyperparameters maximize the log marginal likelihood summed over columns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "muscup/core/errors.hpp"
#include "muscup/core/field.hpp"
#include "muscup/uq/random.hpp"

namespace muscup {

struct GPHyperparameters {
  std::vector<double> lengthscales;
  double signal_variance = 1.0;
};

struct GPConfig {
  std::size_t N_meta = 25;
  double nugget = 1e-8;
  int multistarts = 5;
  int max_evaluations = 200;  // per start
  std::uint64_t seed = 0;
  /// Skip optimization and use these hyperparameters.
  std::optional<GPHyperparameters> fixed;

  void validate() const {
    if (N_meta < 4) throw ConfigError("N_meta must be at least 4");
    if (!(nugget > 0.0)) throw ConfigError("nugget must be positive");
    if (multistarts < 1) throw ConfigError("multistarts must be at least 1");
    if (max_evaluations < 1) throw ConfigError("evaluation cap must be positive");
    if (fixed) {
      for (double l : fixed->lengthscales)
        if (!(l > 0.0)) throw ConfigError("lengthscales must be positive");
      if (!(fixed->signal_variance > 0.0))
        throw ConfigError("signal variance must be positive");
    }
  }
};

inline constexpr double kMaxNugget = 1e-4;

inline double se_kernel(std::span<const double> a, std::span<const double> b,
                        const GPHyperparameters& h) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = (a[i] - b[i]) / h.lengthscales[i];
    r2 += t * t;
  }
  return h.signal_variance * std::exp(-0.5 * r2);
}

namespace detail {

// Row-major copy so rows can be viewed as spans.
using GpRows =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const GpRows& m, Eigen::Index r) {
  return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

inline Eigen::MatrixXd kernel_matrix(const GpRows& x, const GPHyperparameters& h,
                                     double nugget) {
  const Eigen::Index N = x.rows();
  Eigen::MatrixXd K(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    K(i, i) = h.signal_variance + nugget;
    for (Eigen::Index j = 0; j < i; ++j)
      K(i, j) = K(j, i) = se_kernel(row_span(x, i), row_span(x, j), h);
  }
  return K;
}

}  // namespace detail

/// Accumulates S = sum over blocks of Y~ Y~^T, where each block (N fields)
/// is centered per component and divided by its RMS. Zero blocks carry no
/// information and are skipped.
class GramAccumulator {
 public:
  explicit GramAccumulator(std::size_t n) : S_(Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))) {}

  void add(std::span<const Field> block) {
    const auto N = static_cast<std::size_t>(S_.rows());
    if (block.size() != N)
      throw ConfigError("Gram block has " + std::to_string(block.size()) +
                        " samples, expected " + std::to_string(N));
    const std::size_t m = block.front().size();
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t p = 0; p < m; ++p)
        Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = block[i][p];
    Y.rowwise() -= Y.colwise().mean();
    const double ss = Y.squaredNorm();
    if (!(ss > 0.0)) return;
    Y /= std::sqrt(ss / static_cast<double>(N * m));
    S_.noalias() += Y * Y.transpose();
    columns_ += static_cast<double>(m);
  }

  const Eigen::MatrixXd& gram() const { return S_; }
  double columns() const { return columns_; }

 private:
  Eigen::MatrixXd S_;
  double columns_ = 0.0;
};

/// Summed log marginal likelihood
///   -1/2 tr(K^-1 S) - m/2 log|K| - N m/2 log(2 pi),
/// or nullopt if K is not positive definite.
inline std::optional<double> log_marginal_likelihood(
    const Eigen::MatrixXd& inputs, const GramAccumulator& acc,
    const GPHyperparameters& h, double nugget) {
  const detail::GpRows x = inputs;
  const Eigen::LLT<Eigen::MatrixXd> llt(detail::kernel_matrix(x, h, nugget));
  if (llt.info() != Eigen::Success) return std::nullopt;
  const double N = static_cast<double>(inputs.rows());
  const double m = acc.columns();
  const double logdet =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double fit = llt.solve(acc.gram()).trace();
  if (!std::isfinite(fit) || !std::isfinite(logdet)) return std::nullopt;
  return -0.5 * fit - 0.5 * m * logdet -
         0.5 * N * m * std::log(2.0 * std::numbers::pi);
}

struct HyperparameterFit {
  GPHyperparameters hyper;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  std::vector<double> start_log_likelihoods;  // at each multistart's origin
  int evaluations = 0;
};

/// Gradient-free coordinate search in log space with multistarts. Start 0 is
/// l = 1, s^2 = 1; the others are drawn log-uniformly in [0.1, 10].
inline HyperparameterFit optimize_hyperparameters(const Eigen::MatrixXd& inputs,
                                                  const GramAccumulator& acc,
                                                  const GPConfig& cfg) {
  const auto n = static_cast<std::size_t>(inputs.cols());
  const double lo_l = std::log(1e-2), hi_l = std::log(1e2);
  const double lo_s = std::log(1e-4), hi_s = std::log(1e4);
  auto to_hyper = [n](const std::vector<double>& th) {
    GPHyperparameters h;
    h.lengthscales.resize(n);
    for (std::size_t i = 0; i < n; ++i) h.lengthscales[i] = std::exp(th[i]);
    h.signal_variance = std::exp(th[n]);
    return h;
  };
  HyperparameterFit best;
  auto eval = [&](const std::vector<double>& th) {
    ++best.evaluations;
    const auto v = log_marginal_likelihood(inputs, acc, to_hyper(th), cfg.nugget);
    return v ? *v : -std::numeric_limits<double>::infinity();
  };

  for (int start = 0; start < cfg.multistarts; ++start) {
    std::vector<double> th(n + 1, 0.0);
    if (start > 0)
      for (std::size_t i = 0; i <= n; ++i)
        th[i] = std::log(0.1) +
                std::log(100.0) * counter_uniform(cfg.seed, static_cast<std::uint64_t>(start), i);
    int evals = 0;
    double f = eval(th);
    ++evals;
    best.start_log_likelihoods.push_back(f);
    double h = 1.0;
    while (h >= 1e-3 && evals < cfg.max_evaluations) {
      bool improved = false;
      for (std::size_t i = 0; i <= n && evals < cfg.max_evaluations; ++i) {
        const double lo = i < n ? lo_l : lo_s, hi = i < n ? hi_l : hi_s;
        for (double dir : {1.0, -1.0}) {
          if (evals >= cfg.max_evaluations) break;
          std::vector<double> trial = th;
          trial[i] = std::clamp(th[i] + dir * h, lo, hi);
          if (trial[i] == th[i]) continue;
          const double ft = eval(trial);
          ++evals;
          if (ft > f) {
            f = ft;
            th = std::move(trial);
            improved = true;
            break;
          }
        }
      }
      if (!improved) h *= 0.5;
    }
    if (f > best.log_likelihood) {
      best.log_likelihood = f;
      best.hyper = to_hyper(th);
    }
  }
  if (!std::isfinite(best.log_likelihood))
    throw SingularSystemError(
        "GP hyperparameter search found no positive-definite kernel matrix");
  return best;
}

/// Cholesky factor of K + nugget I; the nugget grows by 10x up to 1e-4 until
/// the factorization succeeds.
struct GPFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double nugget = 0.0;
};

inline GPFactor factorize_kernel(const Eigen::MatrixXd& inputs,
                                 const GPHyperparameters& h, double nugget) {
  const detail::GpRows x = inputs;
  GPFactor f;
  for (double nu = nugget; nu <= kMaxNugget * (1.0 + 1e-12); nu *= 10.0) {
    f.llt.compute(detail::kernel_matrix(x, h, nu));
    if (f.llt.info() == Eigen::Success) {
      f.nugget = nu;
      return f;
    }
  }
  throw SingularSystemError("GP kernel matrix not positive definite with nugget up to " +
                            std::to_string(kMaxNugget));
}

struct GPPrediction {
  Field mean;
  Field variance;
};

/// Fitted GP over field-valued outputs. Stores the training inputs, the
/// hyperparameters, the per-component mean, the output scale and the weight
/// vectors K^-1 (Y - mean), one per component.
class GPModel {
 public:
  GPModel(Eigen::MatrixXd inputs, GPHyperparameters hyper, double nugget,
          std::span<const Field> outputs)
      : inputs_(std::move(inputs)), hyper_(std::move(hyper)) {
    check_shapes(outputs.size());
    if (outputs.empty()) throw ConfigError("GP needs training outputs");
    factor_ = factorize_kernel(inputs_, hyper_, nugget);
    const auto N = static_cast<Eigen::Index>(outputs.size());
    const auto m = static_cast<Eigen::Index>(outputs.front().size());
    Eigen::MatrixXd Y(N, m);
    for (Eigen::Index i = 0; i < N; ++i) {
      if (static_cast<Eigen::Index>(outputs[i].size()) != m)
        throw ConfigError("GP training outputs have unequal lengths");
      Y.row(i) = Eigen::Map<const Eigen::RowVectorXd>(outputs[i].data(), m);
    }
    const Eigen::RowVectorXd mu = Y.colwise().mean();
    Y.rowwise() -= mu;
    scale_ = std::sqrt(Y.squaredNorm() / static_cast<double>(N * m));
    mean_ = Field(outputs.front().grid,
                  std::vector<double>(mu.data(), mu.data() + m));
    weights_ = factor_.llt.solve(Y);
  }

  std::size_t size() const { return static_cast<std::size_t>(inputs_.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(inputs_.cols()); }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const GPHyperparameters& hyperparameters() const { return hyper_; }
  double nugget() const { return factor_.nugget; }
  double output_scale() const { return scale_; }
  const Field& prior_mean() const { return mean_; }
  const Eigen::MatrixXd& weights() const { return weights_; }

  /// k(z, X), length N.
  Eigen::VectorXd cross_covariance(std::span<const double> z) const {
    if (z.size() != dimension())
      throw ConfigError("GP query dimension " + std::to_string(z.size()) +
                        " does not match " + std::to_string(dimension()));
    const detail::GpRows x = inputs_;
    Eigen::VectorXd k(inputs_.rows());
    for (Eigen::Index i = 0; i < k.size(); ++i)
      k(i) = se_kernel(z, detail::row_span(x, i), hyper_);
    return k;
  }

  /// lambda(z) = K^-1 k(z): the posterior mean is mean + sum_i lambda_i (Y_i - mean).
  Eigen::VectorXd cardinal_weights(std::span<const double> z) const {
    return factor_.llt.solve(cross_covariance(z));
  }

  /// Predictive variance in normalized units: s^2 + nugget - k^T K^-1 k.
  double latent_variance(std::span<const double> z) const {
    const Eigen::VectorXd k = cross_covariance(z);
    double v = hyper_.signal_variance + factor_.nugget - k.dot(factor_.llt.solve(k));
    if (v < 0.0) {
      if (v < -1e-12)
        std::cerr << "warning: GP predictive variance " << v
                  << " clamped to 0\n";
      v = 0.0;
    }
    return v;
  }

  GPPrediction predict(std::span<const double> z) const {
    const Eigen::VectorXd k = cross_covariance(z);
    GPPrediction p{mean_, Field(mean_.grid)};
    const Eigen::VectorXd delta = weights_.transpose() * k;
    for (std::size_t i = 0; i < p.mean.size(); ++i)
      p.mean[i] += delta(static_cast<Eigen::Index>(i));
    const double var = scale_ * scale_ * latent_variance(z);
    std::fill(p.variance.values.begin(), p.variance.values.end(), var);
    return p;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["inputs"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
      std::vector<double> row(inputs_.cols());
      for (Eigen::Index c = 0; c < inputs_.cols(); ++c) row[c] = inputs_(i, c);
      j["inputs"].push_back(row);
    }
    j["lengthscales"] = hyper_.lengthscales;
    j["signal_variance"] = hyper_.signal_variance;
    j["nugget"] = factor_.nugget;
    j["output_scale"] = scale_;
    j["grid"] = {{"nx", mean_.grid.nx}, {"ny", mean_.grid.ny},
                 {"dx", mean_.grid.dx}, {"dy", mean_.grid.dy},
                 {"x0", mean_.grid.x0}, {"y0", mean_.grid.y0},
                 {"components", mean_.grid.components}};
    j["mean"] = mean_.values;
    j["weights"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
      std::vector<double> row(weights_.cols());
      for (Eigen::Index c = 0; c < weights_.cols(); ++c) row[c] = weights_(i, c);
      j["weights"].push_back(row);
    }
    return j;
  }

  static GPModel from_json(const nlohmann::json& j) {
    GPModel m;
    const auto& rows = j.at("inputs");
    const auto N = static_cast<Eigen::Index>(rows.size());
    const auto n = N ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    m.inputs_.resize(N, n);
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index c = 0; c < n; ++c) m.inputs_(i, c) = rows[i][c].get<double>();
    m.hyper_.lengthscales = j.at("lengthscales").get<std::vector<double>>();
    m.hyper_.signal_variance = j.at("signal_variance").get<double>();
    m.check_shapes(static_cast<std::size_t>(N));
    m.scale_ = j.at("output_scale").get<double>();
    const auto& g = j.at("grid");
    const Grid grid{g.at("nx").get<std::size_t>(), g.at("ny").get<std::size_t>(),
                    g.at("dx").get<double>(), g.at("dy").get<double>(),
                    g.at("x0").get<double>(), g.at("y0").get<double>(),
                    g.at("components").get<std::size_t>()};
    m.mean_ = Field(grid, j.at("mean").get<std::vector<double>>());
    const auto& w = j.at("weights");
    if (static_cast<Eigen::Index>(w.size()) != N)
      throw ConfigError("GP weights do not match training inputs");
    m.weights_.resize(N, static_cast<Eigen::Index>(m.mean_.size()));
    for (Eigen::Index i = 0; i < N; ++i) {
      if (w[i].size() != m.mean_.size())
        throw ConfigError("GP weight row length does not match grid");
      for (Eigen::Index c = 0; c < m.weights_.cols(); ++c)
        m.weights_(i, c) = w[i][c].get<double>();
    }
    m.factor_ = factorize_kernel(m.inputs_, m.hyper_, j.at("nugget").get<double>());
    return m;
  }

 private:
  GPModel() = default;

  void check_shapes(std::size_t n_outputs) const {
    if (static_cast<std::size_t>(inputs_.rows()) != n_outputs)
      throw ConfigError("GP: " + std::to_string(inputs_.rows()) +
                        " inputs but " + std::to_string(n_outputs) + " outputs");
    if (hyper_.lengthscales.size() != static_cast<std::size_t>(inputs_.cols()))
      throw ConfigError("GP: one lengthscale per input dimension required");
    for (Eigen::Index i = 0; i < inputs_.rows(); ++i)
      for (Eigen::Index j = 0; j < i; ++j)
        if ((inputs_.row(i) - inputs_.row(j)).norm() == 0.0)
          throw SingularSystemError("duplicate GP training inputs " +
                                    std::to_string(j) + " and " + std::to_string(i));
  }

  Eigen::MatrixXd inputs_;
  GPHyperparameters hyper_;
  GPFactor factor_;
  Field mean_;
  double scale_ = 0.0;
  Eigen::MatrixXd weights_;
};

/// Fits hyperparameters by maximum marginal likelihood (unless fixed in
/// `cfg`) and builds the model.
inline GPModel fit_gp(const Eigen::MatrixXd& inputs, std::span<const Field> outputs,
                      const GPConfig& cfg) {
  if (static_cast<std::size_t>(inputs.rows()) != outputs.size())
    throw ConfigError("fit_gp: input and output counts differ");
  if (cfg.nugget <= 0.0) throw ConfigError("nugget must be positive");
  GPHyperparameters h;
  if (cfg.fixed) {
    h = *cfg.fixed;
  } else {
    GramAccumulator acc(outputs.size());
    acc.add(outputs);
    if (acc.columns() == 0.0)
      h.lengthscales.assign(static_cast<std::size_t>(inputs.cols()), 1.0);
    else
      h = optimize_hyperparameters(inputs, acc, cfg).hyper;
  }
  return GPModel(inputs, std::move(h), cfg.nugget, outputs);
}

}  // namespace muscup
