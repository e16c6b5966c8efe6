#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "muscup/core/errors.hpp"

namespace muscup {

/// Uniform structured grid. 1D grids have ny == 1. A field may stack several
/// components on the same grid (Gray-Scott stores u then v).
struct Grid {
  std::size_t nx = 0;
  std::size_t ny = 1;
  double dx = 0.0;
  double dy = 0.0;
  double x0 = 0.0;  // coordinate of node (0, *)
  double y0 = 0.0;  // coordinate of node (*, 0)
  std::size_t components = 1;

  static Grid line(std::size_t nx, double dx, double x0 = 0.0) {
    return Grid{nx, 1, dx, 0.0, x0, 0.0, 1};
  }
  static Grid plane(std::size_t nx, std::size_t ny, double dx, double dy,
                    double x0, double y0, std::size_t components = 1) {
    return Grid{nx, ny, dx, dy, x0, y0, components};
  }

  std::size_t points() const { return nx * ny; }
  std::size_t size() const { return points() * components; }
  bool is_2d() const { return ny > 1; }
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double y(std::size_t j) const { return y0 + static_cast<double>(j) * dy; }
  // Row-major: x index runs fastest.
  std::size_t index(std::size_t i, std::size_t j, std::size_t c = 0) const {
    return c * points() + j * nx + i;
  }

  bool operator==(const Grid&) const = default;
};

/// Values of one or more quantities on a grid.
struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}
  Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw ConfigError("field length " + std::to_string(values.size()) +
                        " does not match grid size " +
                        std::to_string(grid.size()));
  }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }

  std::span<double> component(std::size_t c) {
    return {values.data() + c * grid.points(), grid.points()};
  }
  std::span<const double> component(std::size_t c) const {
    return {values.data() + c * grid.points(), grid.points()};
  }

  bool all_finite() const {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
  }

  /// Index of the first non-finite entry, or size() if all are finite.
  std::size_t first_non_finite() const {
    auto it = std::find_if(values.begin(), values.end(),
                           [](double v) { return !std::isfinite(v); });
    return static_cast<std::size_t>(it - values.begin());
  }

  void validate() const {
    if (values.size() != grid.size())
      throw ConfigError("field length does not match grid");
    if (!all_finite()) throw ConfigError("field contains non-finite values");
  }

  bool operator==(const Field&) const = default;
};

inline Field operator+(const Field& a, const Field& b) {
  Field out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline Field operator-(const Field& a, const Field& b) {
  Field out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

}  // namespace muscup
