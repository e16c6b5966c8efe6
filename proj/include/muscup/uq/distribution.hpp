#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "muscup/core/errors.hpp"
#include "muscup/uq/random.hpp"

namespace muscup {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniform input on [mean (1 - rho), mean (1 + rho)].
struct UniformInput {
  double mean = 0.0;
  double rel_half_width = 0.0;

  double half_width() const { return std::abs(mean) * rel_half_width; }
  double lower() const { return mean - half_width(); }
  double upper() const { return mean + half_width(); }
  bool degenerate() const { return rel_half_width == 0.0 || mean == 0.0; }
};

class InputDistribution {
 public:
  InputDistribution() = default;
  explicit InputDistribution(std::vector<UniformInput> dims)
      : dims_(std::move(dims)) {
    validate();
  }

  /// rho = 0 is accepted and yields a point mass.
  void validate() const {
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      const auto& d = dims_[i];
      if (!std::isfinite(d.mean))
        throw ConfigError("input " + std::to_string(i) + ": mean not finite");
      if (!(d.rel_half_width >= 0.0 && d.rel_half_width < 1.0))
        throw ConfigError("input " + std::to_string(i) +
                          ": relative half-width must lie in [0, 1)");
    }
  }

  std::size_t dimension() const { return dims_.size(); }
  const UniformInput& operator[](std::size_t i) const { return dims_[i]; }
  const std::vector<UniformInput>& dims() const { return dims_; }

  /// Indices of dimensions with nonzero spread.
  std::vector<std::size_t> active_dimensions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (!dims_[i].degenerate()) out.push_back(i);
    return out;
  }

  /// Maps a reference coordinate zeta in [-1, 1] to the physical support.
  double from_reference(std::size_t i, double zeta) const {
    return dims_[i].mean + dims_[i].half_width() * zeta;
  }
  double to_reference(std::size_t i, double xi) const {
    const double h = dims_[i].half_width();
    return h == 0.0 ? 0.0 : (xi - dims_[i].mean) / h;
  }

  bool contains(std::span<const double> xi) const {
    if (xi.size() != dims_.size()) return false;
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (xi[i] < dims_[i].lower() || xi[i] > dims_[i].upper()) return false;
    return true;
  }

 private:
  std::vector<UniformInput> dims_;
};

struct SampleSet {
  RowMatrix inputs;  // N x n, one row per sample
  std::uint64_t seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
  std::size_t dimension() const {
    return static_cast<std::size_t>(inputs.cols());
  }
  std::span<const double> row(std::size_t j) const {
    return {inputs.data() + j * dimension(), dimension()};
  }
};

/// N i.i.d. uniform draws. Entry (j, i) depends only on (seed, j, i).
inline SampleSet draw_samples(const InputDistribution& dist, std::size_t N,
                              std::uint64_t seed) {
  SampleSet s;
  s.seed = seed;
  s.inputs.resize(static_cast<Eigen::Index>(N),
                  static_cast<Eigen::Index>(dist.dimension()));
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < dist.dimension(); ++i) {
      const double u = counter_uniform(seed, j, i);
      s.inputs(j, i) = dist[i].lower() + (dist[i].upper() - dist[i].lower()) * u;
    }
  return s;
}

/// Reference coordinates in [-1, 1] of the active dimensions (N x n_active).
inline Eigen::MatrixXd reference_coordinates(const InputDistribution& dist,
                                             const RowMatrix& inputs) {
  const auto active = dist.active_dimensions();
  Eigen::MatrixXd z(inputs.rows(), static_cast<Eigen::Index>(active.size()));
  for (Eigen::Index j = 0; j < inputs.rows(); ++j)
    for (std::size_t a = 0; a < active.size(); ++a)
      z(j, static_cast<Eigen::Index>(a)) =
          dist.to_reference(active[a], inputs(j, active[a]));
  return z;
}

}  // namespace muscup
