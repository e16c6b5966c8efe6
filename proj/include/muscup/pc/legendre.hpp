#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "muscup/core/errors.hpp"

namespace muscup {

/// Legendre polynomial P_n(x) and its derivative by the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = std::abs(x) == 1.0
                        ? 0.5 * n * (n + 1.0) * std::pow(x, n + 1)
                        : n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

inline double legendre(int n, double x) { return legendre_with_derivative(n, x).first; }

/// Legendre polynomial normalized to unit variance under the uniform
/// probability measure on [-1, 1].
inline double legendre_orthonormal(int n, double x) {
  return std::sqrt(2.0 * n + 1.0) * legendre(n, x);
}

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // probability weights, summing to 1
};

/// q-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_q, with
/// weights for the uniform probability measure.
inline QuadratureRule gauss_legendre(int q) {
  if (q < 1) throw ConfigError("quadrature level must be positive");
  QuadratureRule r;
  r.nodes.resize(q);
  r.weights.resize(q);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre_with_derivative(q, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre_with_derivative(q, x).second;
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // (2 / ...) / 2
    r.nodes[i] = -x;
    r.nodes[q - 1 - i] = x;
    r.weights[i] = r.weights[q - 1 - i] = w;
  }
  if (q % 2 == 1) r.nodes[q / 2] = 0.0;
  return r;
}

}  // namespace muscup
