#pragma once

// Scattered-data interpolation with the cubic radial kernel r^3 plus a
// linear polynomial tail. The augmented system
//
//   [ A   P ] [c]   [f]
//   [ P^T 0 ] [a] = [0],   A_ij = |z_i - z_j|^3,  P = [1 z]
//
// depends only on the centers, so it is factorized once and shared by every
// output component and every macro step. Predictions use the cardinal form
// f(z) = sum_i lambda_i(z) f_i with lambda(z) the first N entries of
// M^{-1} [phi(z); 1; z] (M is symmetric).

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "muscup/core/errors.hpp"
#include "muscup/core/field.hpp"

namespace muscup {

class CubicRbfBasis {
 public:
  CubicRbfBasis() = default;

  /// Factorizes the augmented system for `centers` (N x n). With n == 0 the
  /// basis degenerates to the constant (mean) predictor.
  explicit CubicRbfBasis(Eigen::MatrixXd centers) : centers_(std::move(centers)) {
    const Eigen::Index N = centers_.rows(), n = centers_.cols();
    if (N < 1) throw ConfigError("interpolator needs at least one center");
    if (n == 0) return;
    if (N < n + 1)
      throw SingularSystemError("interpolator needs at least n+1 centers");

    const double scale = std::max(1.0, centers_.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = i + 1; j < N; ++j)
        if ((centers_.row(i) - centers_.row(j)).norm() <= 1e-12 * scale)
          throw SingularSystemError("duplicate interpolation centers " +
                                    std::to_string(i) + " and " +
                                    std::to_string(j));

    Eigen::MatrixXd P(N, n + 1);
    P.col(0).setOnes();
    P.rightCols(n) = centers_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(P);
    qr.setThreshold(1e-10);
    if (qr.rank() < n + 1)
      throw SingularSystemError(
          "interpolation centers are affinely dependent; the linear tail is "
          "not determined");

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N + n + 1, N + n + 1);
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = 0; j < N; ++j)
        M(i, j) = kernel((centers_.row(i) - centers_.row(j)).norm());
    M.topRightCorner(N, n + 1) = P;
    M.bottomLeftCorner(n + 1, N) = P.transpose();
    lu_.compute(M);
    if (!(lu_.rcond() > 1e-15))
      throw SingularSystemError("interpolation system is numerically singular");
  }

  static double kernel(double r) { return r * r * r; }

  std::size_t size() const { return static_cast<std::size_t>(centers_.rows()); }
  std::size_t dimension() const {
    return static_cast<std::size_t>(centers_.cols());
  }
  const Eigen::MatrixXd& centers() const { return centers_; }

  /// Cardinal weights lambda(z), length N.
  Eigen::VectorXd cardinal_weights(std::span<const double> z) const {
    const Eigen::Index N = centers_.rows(), n = centers_.cols();
    if (static_cast<Eigen::Index>(z.size()) != n)
      throw ConfigError("query dimension does not match interpolator");
    if (n == 0) return Eigen::VectorXd::Constant(N, 1.0 / static_cast<double>(N));
    Eigen::Map<const Eigen::RowVectorXd> q(z.data(), n);
    Eigen::VectorXd rhs(N + n + 1);
    for (Eigen::Index i = 0; i < N; ++i)
      rhs(i) = kernel((centers_.row(i) - q).norm());
    rhs(N) = 1.0;
    rhs.tail(n) = q.transpose();
    return lu_.solve(rhs).head(N);
  }

  /// Solves for RBF weights and tail coefficients of one output column.
  Eigen::MatrixXd coefficients(const Eigen::MatrixXd& values) const {
    const Eigen::Index N = centers_.rows(), n = centers_.cols();
    if (n == 0) return values.colwise().mean();
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(N + n + 1, values.cols());
    rhs.topRows(N) = values;
    return lu_.solve(rhs);
  }

 private:
  Eigen::MatrixXd centers_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// sum_i w_i f_i over fields, in index order.
inline Field combine(const Eigen::VectorXd& weights,
                     std::span<const Field* const> fields) {
  Field out(fields.front()->grid);
  double* o = out.data();
  const std::size_t m = out.size();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const double w = weights(static_cast<Eigen::Index>(i));
    const double* f = fields[i]->data();
    for (std::size_t k = 0; k < m; ++k) o[k] += w * f[k];
  }
  return out;
}

/// Cubic RBF interpolant of field-valued outputs over input space.
class Interpolator {
 public:
  Interpolator(CubicRbfBasis basis, std::vector<Field> outputs)
      : basis_(std::move(basis)), outputs_(std::move(outputs)) {
    if (outputs_.size() != basis_.size())
      throw ConfigError("interpolator: " + std::to_string(basis_.size()) +
                        " centers but " + std::to_string(outputs_.size()) +
                        " outputs");
    ptrs_.reserve(outputs_.size());
    for (const Field& f : outputs_) ptrs_.push_back(&f);
  }
  Interpolator(const Interpolator& o) : Interpolator(o.basis_, o.outputs_) {}
  Interpolator& operator=(const Interpolator&) = delete;

  const CubicRbfBasis& basis() const { return basis_; }

  Field predict(std::span<const double> z) const {
    return combine(basis_.cardinal_weights(z), ptrs_);
  }

 private:
  CubicRbfBasis basis_;
  std::vector<Field> outputs_;
  std::vector<const Field*> ptrs_;
};

inline Interpolator fit_interpolator(const Eigen::MatrixXd& inputs,
                                     std::span<const Field> outputs) {
  if (static_cast<std::size_t>(inputs.rows()) != outputs.size())
    throw ConfigError("fit_interpolator: input and output counts differ");
  return Interpolator(CubicRbfBasis(inputs),
                      std::vector<Field>(outputs.begin(), outputs.end()));
}

inline Eigen::MatrixXd without_row(const Eigen::MatrixXd& m, Eigen::Index r) {
  Eigen::MatrixXd out(m.rows() - 1, m.cols());
  out.topRows(r) = m.topRows(r);
  out.bottomRows(m.rows() - r - 1) = m.bottomRows(m.rows() - r - 1);
  return out;
}

/// Leave-one-out cardinal weights: entry i holds the weights over the other
/// N - 1 centers for predicting at center i.
inline std::vector<Eigen::VectorXd> loo_weights(const Eigen::MatrixXd& inputs) {
  const Eigen::Index N = inputs.rows();
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i) {
    try {
      CubicRbfBasis fold(without_row(inputs, i));
      const Eigen::RowVectorXd z = inputs.row(i);
      out.push_back(fold.cardinal_weights({z.data(), static_cast<std::size_t>(z.size())}));
    } catch (const SingularSystemError& e) {
      throw SingularSystemError("leave-one-out fold " + std::to_string(i) +
                                ": " + e.what());
    }
  }
  return out;
}

/// Prediction at each center from the interpolant fitted on all others.
inline std::vector<Field> loo_predictions(const Eigen::MatrixXd& inputs,
                                          std::span<const Field> outputs) {
  if (static_cast<std::size_t>(inputs.rows()) != outputs.size())
    throw ConfigError("loo_predictions: input and output counts differ");
  const auto weights = loo_weights(inputs);
  std::vector<Field> out;
  out.reserve(outputs.size());
  std::vector<const Field*> others;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    others.clear();
    for (std::size_t j = 0; j < outputs.size(); ++j)
      if (j != i) others.push_back(&outputs[j]);
    out.push_back(combine(weights[i], others));
  }
  return out;
}

}  // namespace muscup
