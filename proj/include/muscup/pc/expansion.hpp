#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "muscup/core/errors.hpp"
#include "muscup/core/field.hpp"
#include "muscup/pc/basis.hpp"
#include "muscup/uq/distribution.hpp"

namespace muscup {

/// Coefficient matrix, one row per basis function, one column per grid value.
using PCMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PCExpansion {
  Grid grid;
  PCMatrix coeffs;  // P x grid.size()

  PCExpansion() = default;
  PCExpansion(const Grid& g, std::size_t basis_size)
      : grid(g), coeffs(PCMatrix::Zero(static_cast<Eigen::Index>(basis_size),
                                       static_cast<Eigen::Index>(g.size()))) {}
  PCExpansion(const Grid& g, PCMatrix c) : grid(g), coeffs(std::move(c)) {
    if (coeffs.cols() != static_cast<Eigen::Index>(g.size()))
      throw ConfigError("coefficient columns do not match the grid");
  }

  /// Deterministic field: coefficient 0 only.
  static PCExpansion deterministic(const Field& f, std::size_t basis_size) {
    PCExpansion e(f.grid, basis_size);
    for (std::size_t k = 0; k < f.size(); ++k) e.coeffs(0, static_cast<Eigen::Index>(k)) = f[k];
    return e;
  }

  std::size_t basis_size() const { return static_cast<std::size_t>(coeffs.rows()); }

  Field coefficient(std::size_t i) const {
    const auto r = coeffs.row(static_cast<Eigen::Index>(i));
    return Field(grid, std::vector<double>(r.data(), r.data() + r.size()));
  }

  bool all_finite() const { return coeffs.allFinite(); }
};

/// c_l = sum_ij a_i b_j C[i][j][l]. Either operand may be spatially
/// constant (one column) and is then broadcast.
inline PCMatrix galerkin_product(const PCBasis& basis, const PCMatrix& a, const PCMatrix& b) {
  const auto P = static_cast<Eigen::Index>(basis.size());
  if (a.rows() != P || b.rows() != P)
    throw ConfigError("expansion does not match the basis size " + std::to_string(P));
  if (a.cols() != b.cols() && a.cols() != 1 && b.cols() != 1)
    throw ConfigError("expansions have different grid sizes");
  if (a.cols() == 1 && b.cols() != 1) return galerkin_product(basis, b, a);
  const Eigen::Index m = a.cols();
  PCMatrix c = PCMatrix::Zero(P, m);
  const bool broadcast = b.cols() == 1 && m != 1;
  for (Eigen::Index i = 0; i < P; ++i) {
    const auto ai = a.row(i);
    if ((ai.array() == 0.0).all()) continue;
    for (const auto& e : basis.triples_for(static_cast<std::size_t>(i))) {
      const auto j = static_cast<Eigen::Index>(e.j), l = static_cast<Eigen::Index>(e.l);
      if (broadcast) {
        const double bj = b(j, 0);
        if (bj != 0.0) c.row(l) += (e.value * bj) * ai;
      } else {
        c.row(l).array() += e.value * ai.array() * b.row(j).array();
      }
    }
  }
  return c;
}

inline PCExpansion galerkin_multiply(const PCExpansion& a, const PCExpansion& b,
                                     const PCBasis& basis) {
  if (a.basis_size() != basis.size() || b.basis_size() != basis.size())
    throw ConfigError("expansion does not match the basis");
  if (a.coeffs.cols() != b.coeffs.cols())
    throw ConfigError("expansions live on different grids");
  return PCExpansion{a.grid, galerkin_product(basis, a.coeffs, b.coeffs)};
}

/// Mean = coefficient 0, variance = sum of the squared higher coefficients.
inline std::pair<Field, Field> moments_from_pc(const PCExpansion& e) {
  Field mean(e.grid), sd(e.grid);
  for (Eigen::Index k = 0; k < e.coeffs.cols(); ++k) {
    mean[static_cast<std::size_t>(k)] = e.coeffs(0, k);
    double v = 0.0;
    for (Eigen::Index i = 1; i < e.coeffs.rows(); ++i) v += e.coeffs(i, k) * e.coeffs(i, k);
    sd[static_cast<std::size_t>(k)] = std::sqrt(v);
  }
  return {mean, sd};
}

/// Coefficients (P x 1) of an affine uniform input xi_d = mean + h zeta_d.
inline PCMatrix input_expansion(const PCBasis& basis, const InputDistribution& dist,
                                std::size_t d) {
  PCMatrix c = PCMatrix::Zero(static_cast<Eigen::Index>(basis.size()), 1);
  c(0, 0) = dist[d].mean;
  const double h = dist[d].half_width();
  if (h != 0.0) c(static_cast<Eigen::Index>(basis.linear_index(d)), 0) = h / std::sqrt(3.0);
  return c;
}

/// Physical input vector at a reference point.
inline std::vector<double> physical_point(const InputDistribution& dist,
                                          std::span<const double> z) {
  std::vector<double> xi(dist.dimension());
  for (std::size_t d = 0; d < xi.size(); ++d) xi[d] = dist.from_reference(d, z[d]);
  return xi;
}

/// Evaluation of the expansion at a reference point.
inline Field evaluate_expansion(const PCExpansion& e, const PCBasis& basis,
                                std::span<const double> z) {
  const Eigen::VectorXd psi = basis.evaluate_all(z);
  Field out(e.grid);
  Eigen::Map<Eigen::RowVectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) =
      psi.transpose() * e.coeffs;
  return out;
}

/// Values at every quadrature node (row k = node k).
inline PCMatrix evaluate_at_nodes(const PCExpansion& e, const PCBasis& basis) {
  return basis.vandermonde() * e.coeffs;
}

/// Discrete projection of nodal values (row k = node k) onto the basis.
inline PCExpansion project_nodal(const PCMatrix& nodal, const Grid& grid, const PCBasis& basis) {
  if (nodal.rows() != basis.vandermonde().rows())
    throw ConfigError("nodal values do not match the quadrature rule");
  PCExpansion e;
  e.grid = grid;
  e.coeffs = basis.vandermonde().transpose() * basis.weights().asDiagonal() * nodal;
  return e;
}

/// Non-intrusive projection of a field-valued function of the inputs.
template <class Fn>
PCExpansion project(const PCBasis& basis, const Grid& grid, Fn&& f) {
  const Eigen::MatrixXd& z = basis.nodes();
  PCMatrix nodal(z.rows(), static_cast<Eigen::Index>(grid.size()));
  std::vector<double> zk(basis.dimension());
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    for (std::size_t d = 0; d < zk.size(); ++d) zk[d] = z(k, static_cast<Eigen::Index>(d));
    const Field v = f(std::span<const double>(zk));
    nodal.row(k) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return project_nodal(nodal, grid, basis);
}

/// CSV with one row per basis function: index, multi-index, then one column
/// per grid value.
inline void write_csv(std::ostream& os, const PCExpansion& e, const PCBasis& basis) {
  os.precision(17);
  os << "index,multi_index";
  for (Eigen::Index k = 0; k < e.coeffs.cols(); ++k) os << ",v" << k;
  os << "\n";
  for (std::size_t i = 0; i < e.basis_size(); ++i) {
    os << i << ",";
    for (std::size_t d = 0; d < basis.dimension(); ++d)
      os << (d ? "-" : "") << basis.indices()[i][d];
    for (Eigen::Index k = 0; k < e.coeffs.cols(); ++k) os << "," << e.coeffs(static_cast<Eigen::Index>(i), k);
    os << "\n";
  }
}

}  // namespace muscup
