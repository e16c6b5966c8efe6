#pragma once

// Total-degree tensor Legendre basis on [-1, 1]^n, orthonormal under the
// uniform probability measure, with a tensor Gauss-Legendre rule and the
// triple-product tensor C[i][j][l] = <psi_i psi_j psi_l>.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "muscup/core/errors.hpp"
#include "muscup/pc/legendre.hpp"

namespace muscup {

using MultiIndex = std::vector<int>;

/// Multi-indices of total degree <= order, graded by degree and ordered
/// reverse-lexicographically within a degree.
inline std::vector<MultiIndex> total_degree_indices(std::size_t n, int order) {
  std::vector<MultiIndex> out;
  MultiIndex a(n, 0);
  for (int deg = 0; deg <= order; ++deg) {
    std::function<void(std::size_t, int)> rec = [&](std::size_t d, int left) {
      if (d + 1 == n) {
        a[d] = left;
        out.push_back(a);
        return;
      }
      for (int v = left; v >= 0; --v) {
        a[d] = v;
        rec(d + 1, left - v);
      }
    };
    if (n == 0) {
      if (deg == 0) out.push_back({});
      continue;
    }
    rec(0, deg);
  }
  return out;
}

inline std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

class PCBasis {
 public:
  struct Entry {
    std::size_t j;
    std::size_t l;
    double value;
  };

  /// q: Gauss-Legendre level per dimension for projections.
  PCBasis(std::size_t n, int order, int q) : n_(n), order_(order), q_(q) {
    if (order < 0) throw ConfigError("PC order must be nonnegative");
    if (q < order + 1)
      throw ConfigError("quadrature level " + std::to_string(q) +
                        " below order + 1 = " + std::to_string(order + 1));
    indices_ = total_degree_indices(n, order);
    build_quadrature();
    build_triple_products();
  }

  std::size_t dimension() const { return n_; }
  int order() const { return order_; }
  int quadrature_level() const { return q_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  /// Position of the first-degree polynomial in dimension d.
  std::size_t linear_index(std::size_t d) const {
    MultiIndex e(n_, 0);
    e[d] = 1;
    for (std::size_t i = 0; i < indices_.size(); ++i)
      if (indices_[i] == e) return i;
    throw ConfigError("basis has no linear term");
  }

  double evaluate(std::size_t i, std::span<const double> z) const {
    double v = 1.0;
    for (std::size_t d = 0; d < n_; ++d) v *= legendre_orthonormal(indices_[i][d], z[d]);
    return v;
  }

  /// psi_i at every basis function for one point.
  Eigen::VectorXd evaluate_all(std::span<const double> z) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) out(static_cast<Eigen::Index>(i)) = evaluate(i, z);
    return out;
  }

  /// Tensor quadrature: nodes (Q x n) and probability weights (Q).
  const Eigen::MatrixXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  /// psi_i(node_k), Q x P.
  const Eigen::MatrixXd& vandermonde() const { return psi_; }

  /// Gram matrix of the basis under the stored quadrature.
  Eigen::MatrixXd gram() const {
    return psi_.transpose() * weights_.asDiagonal() * psi_;
  }

  double triple(std::size_t i, std::size_t j, std::size_t l) const {
    return dense_[(i * size() + j) * size() + l];
  }
  /// Nonzero (j, l, C[i][j][l]) for fixed i.
  const std::vector<Entry>& triples_for(std::size_t i) const { return sparse_[i]; }

  bool operator==(const PCBasis& o) const {
    return n_ == o.n_ && order_ == o.order_ && q_ == o.q_;
  }

 private:
  void build_quadrature() {
    const QuadratureRule r = gauss_legendre(q_);
    std::size_t Q = 1;
    for (std::size_t d = 0; d < n_; ++d) Q *= static_cast<std::size_t>(q_);
    nodes_.resize(static_cast<Eigen::Index>(Q), static_cast<Eigen::Index>(n_));
    weights_.resize(static_cast<Eigen::Index>(Q));
    for (std::size_t k = 0; k < Q; ++k) {
      std::size_t rem = k;
      double w = 1.0;
      for (std::size_t d = 0; d < n_; ++d) {
        const std::size_t a = rem % static_cast<std::size_t>(q_);
        rem /= static_cast<std::size_t>(q_);
        nodes_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d)) = r.nodes[a];
        w *= r.weights[a];
      }
      weights_(static_cast<Eigen::Index>(k)) = w;
    }
    psi_.resize(static_cast<Eigen::Index>(Q), static_cast<Eigen::Index>(size()));
    std::vector<double> z(n_);
    for (std::size_t k = 0; k < Q; ++k) {
      for (std::size_t d = 0; d < n_; ++d) z[d] = nodes_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < size(); ++i)
        psi_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = evaluate(i, z);
    }
  }

  // Products of exact 1D triple integrals; the 1D rule integrates degree
  // 3 * order exactly. Computed for sorted index triples and mirrored.
  void build_triple_products() {
    const int qt = (3 * order_ + 2) / 2 + 1;
    const QuadratureRule r = gauss_legendre(qt);
    const auto m = static_cast<std::size_t>(order_ + 1);
    std::vector<double> t1(m * m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b)
        for (std::size_t c = b; c < m; ++c) {
          double s = 0.0;
          for (int k = 0; k < qt; ++k) {
            const double x = r.nodes[k];
            s += r.weights[k] * legendre_orthonormal(static_cast<int>(a), x) *
                 legendre_orthonormal(static_cast<int>(b), x) *
                 legendre_orthonormal(static_cast<int>(c), x);
          }
          // Parity and triangle rules make these exactly zero.
          if ((a + b + c) % 2 == 1 || c > a + b) s = 0.0;
          const std::size_t p[3] = {a, b, c};
          for (int x = 0; x < 3; ++x)
            for (int y = 0; y < 3; ++y)
              for (int z = 0; z < 3; ++z)
                if (x != y && y != z && x != z) t1[(p[x] * m + p[y]) * m + p[z]] = s;
        }
    const std::size_t P = size();
    dense_.assign(P * P * P, 0.0);
    sparse_.assign(P, {});
    for (std::size_t i = 0; i < P; ++i)
      for (std::size_t j = i; j < P; ++j)
        for (std::size_t l = j; l < P; ++l) {
          double v = 1.0;
          for (std::size_t d = 0; d < n_; ++d)
            v *= t1[(static_cast<std::size_t>(indices_[i][d]) * m +
                     static_cast<std::size_t>(indices_[j][d])) * m +
                    static_cast<std::size_t>(indices_[l][d])];
          const std::size_t p[3] = {i, j, l};
          for (int x = 0; x < 3; ++x)
            for (int y = 0; y < 3; ++y)
              for (int z = 0; z < 3; ++z)
                if (x != y && y != z && x != z) dense_[(p[x] * P + p[y]) * P + p[z]] = v;
        }
    for (std::size_t i = 0; i < P; ++i)
      for (std::size_t j = 0; j < P; ++j)
        for (std::size_t l = 0; l < P; ++l)
          if (const double v = triple(i, j, l); v != 0.0) sparse_[i].push_back({j, l, v});
  }

  std::size_t n_;
  int order_;
  int q_;
  std::vector<MultiIndex> indices_;
  Eigen::MatrixXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd psi_;
  std::vector<double> dense_;
  std::vector<std::vector<Entry>> sparse_;
};

}  // namespace muscup
