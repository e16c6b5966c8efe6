#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "muscup/core/errors.hpp"
#include "muscup/core/field.hpp"
#include "muscup/uq/random.hpp"

namespace muscup {

struct Interval {
  Field lo;
  Field hi;

  Field half_width() const {
    Field w(lo.grid);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.5 * (hi[i] - lo[i]);
    return w;
  }
};

/// Pointwise mean and standard deviation with confidence intervals.
struct MomentEstimate {
  Field mean;
  Field std;
  Interval ci_mean;
  Interval ci_std;
  double confidence_level = 0.95;
  std::size_t n_samples = 0;
};

enum class Estimator { mean, std };

struct BootstrapConfig {
  int resamples = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
};

namespace detail {

// Neumaier-compensated running sum for one column of values.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

inline void check_outputs(std::span<const Field> outputs) {
  if (outputs.empty()) throw ConfigError("no outputs to estimate from");
  const std::size_t m = outputs.front().size();
  for (std::size_t j = 1; j < outputs.size(); ++j)
    if (outputs[j].size() != m)
      throw ConfigError("outputs have unequal lengths (sample " +
                        std::to_string(j) + ")");
}

// Linear interpolation between order statistics of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Pointwise sample mean, accumulated in sample order with compensation.
inline Field sample_mean(std::span<const Field> outputs) {
  detail::check_outputs(outputs);
  const std::size_t m = outputs.front().size();
  std::vector<detail::CompensatedSum> acc(m);
  for (const Field& f : outputs)
    for (std::size_t i = 0; i < m; ++i) acc[i].add(f[i]);
  Field mean(outputs.front().grid);
  const double n = static_cast<double>(outputs.size());
  for (std::size_t i = 0; i < m; ++i) mean[i] = acc[i].value() / n;
  return mean;
}

/// Pointwise unbiased (N - 1 divisor) sample standard deviation.
inline Field sample_std(std::span<const Field> outputs, const Field& mean) {
  if (outputs.size() < 2)
    throw ConfigError("standard deviation needs at least 2 samples, got " +
                      std::to_string(outputs.size()));
  const std::size_t m = mean.size();
  std::vector<detail::CompensatedSum> acc(m);
  for (const Field& f : outputs)
    for (std::size_t i = 0; i < m; ++i) {
      const double d = f[i] - mean[i];
      acc[i].add(d * d);
    }
  Field sd(mean.grid);
  const double n1 = static_cast<double>(outputs.size() - 1);
  for (std::size_t i = 0; i < m; ++i) sd[i] = std::sqrt(acc[i].value() / n1);
  return sd;
}

struct BootstrapIntervals {
  Interval mean;
  Interval std;
};

/// Percentile bootstrap intervals for the mean and (optionally) the standard
/// deviation, per point, from one set of resamples. Resample b draws index i
/// from the counter stream (seed, b, i). Resample sums are products of a
/// block of draw-count rows with the centered outputs.
inline BootstrapIntervals bootstrap_intervals(std::span<const Field> outputs, double level,
                                              int resamples, std::uint64_t seed,
                                              bool with_std = true) {
  detail::check_outputs(outputs);
  const std::size_t N = outputs.size();
  if (N < 2) throw ConfigError("bootstrap needs at least 2 samples");
  if (resamples < 100) throw ConfigError("bootstrap needs at least 100 resamples");
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("confidence level must lie in (0, 1)");

  using Rows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const std::size_t m = outputs.front().size();
  const auto B = static_cast<std::size_t>(resamples);
  const auto Ni = static_cast<Eigen::Index>(N), mi = static_cast<Eigen::Index>(m);
  const Field center = sample_mean(outputs);
  // Centered outputs, followed by their squares when the std is wanted.
  Rows y(Ni, with_std ? 2 * mi : mi);
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      const double d = outputs[j][i] - center[i];
      y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
      if (with_std) y(static_cast<Eigen::Index>(j), mi + static_cast<Eigen::Index>(i)) = d * d;
    }

  // Point-major replicates: reps[i * B + b].
  std::vector<double> rep_mean(B * m), rep_std(with_std ? B * m : 0);
  const double n = static_cast<double>(N);
  constexpr std::size_t kBlock = 128;
  Rows counts, sums;
  for (std::size_t b0 = 0; b0 < B; b0 += kBlock) {
    const std::size_t nb = std::min(kBlock, B - b0);
    counts.setZero(static_cast<Eigen::Index>(nb), Ni);
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t i = 0; i < N; ++i)
        counts(static_cast<Eigen::Index>(b),
               static_cast<Eigen::Index>(counter_index(seed, b0 + b, i, N))) += 1.0;
    sums.noalias() = counts * y;
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t i = 0; i < m; ++i) {
        const double a = sums(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(i));
        rep_mean[i * B + b0 + b] = center[i] + a / n;
        if (with_std) {
          const double q = sums(static_cast<Eigen::Index>(b), mi + static_cast<Eigen::Index>(i));
          rep_std[i * B + b0 + b] = std::sqrt(std::max(0.0, (q - a * a / n) / (n - 1.0)));
        }
      }
  }

  const double alpha = 1.0 - level;
  auto percentiles = [&](std::vector<double>& reps) {
    Interval out{Field(outputs.front().grid), Field(outputs.front().grid)};
    for (std::size_t i = 0; i < m; ++i) {
      std::span<double> col(reps.data() + i * B, B);
      std::sort(col.begin(), col.end());
      out.lo[i] = detail::quantile_sorted(col, 0.5 * alpha);
      out.hi[i] = detail::quantile_sorted(col, 1.0 - 0.5 * alpha);
    }
    return out;
  };
  BootstrapIntervals r;
  r.mean = percentiles(rep_mean);
  if (with_std) r.std = percentiles(rep_std);
  return r;
}

/// Percentile bootstrap interval of one estimator, per point.
inline Interval bootstrap_ci(std::span<const Field> outputs, Estimator est,
                             double level, int resamples, std::uint64_t seed) {
  auto r = bootstrap_intervals(outputs, level, resamples, seed, est == Estimator::std);
  return est == Estimator::mean ? std::move(r.mean) : std::move(r.std);
}

/// Mean and standard deviation without intervals (intervals collapse onto
/// the point estimates).
inline MomentEstimate estimate_moments(std::span<const Field> outputs) {
  MomentEstimate e;
  e.mean = sample_mean(outputs);
  e.std = sample_std(outputs, e.mean);
  e.ci_mean = {e.mean, e.mean};
  e.ci_std = {e.std, e.std};
  e.n_samples = outputs.size();
  return e;
}

/// Moments with percentile-bootstrap intervals. Intervals are widened where
/// needed so they always contain the point estimate.
inline MomentEstimate estimate_moments(std::span<const Field> outputs,
                                       const BootstrapConfig& cfg) {
  MomentEstimate e = estimate_moments(outputs);
  e.confidence_level = cfg.level;
  BootstrapIntervals ci = bootstrap_intervals(outputs, cfg.level, cfg.resamples, cfg.seed);
  e.ci_mean = std::move(ci.mean);
  e.ci_std = std::move(ci.std);
  for (std::size_t i = 0; i < e.mean.size(); ++i) {
    e.ci_mean.lo[i] = std::min(e.ci_mean.lo[i], e.mean[i]);
    e.ci_mean.hi[i] = std::max(e.ci_mean.hi[i], e.mean[i]);
    e.ci_std.lo[i] = std::min(e.ci_std.lo[i], e.std[i]);
    e.ci_std.hi[i] = std::max(e.ci_std.hi[i], e.std[i]);
  }
  return e;
}

/// Spatial mean of |sigma - sigma_ref| / |sigma_ref| over points where the
/// reference exceeds `floor`.
inline double mean_relative_error(const Field& value, const Field& reference,
                                  double floor = 1e-12) {
  if (value.size() != reference.size())
    throw ConfigError("fields on different grids cannot be compared");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (std::abs(reference[i]) <= floor) continue;
    sum += std::abs(value[i] - reference[i]) / std::abs(reference[i]);
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

inline double spatial_mean(const Field& f) {
  detail::CompensatedSum s;
  for (double v : f.values) s.add(v);
  return f.size() == 0 ? 0.0 : s.value() / static_cast<double>(f.size());
}

}  // namespace muscup
