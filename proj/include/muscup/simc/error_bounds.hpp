#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "muscup/core/errors.hpp"
#include "muscup/core/field.hpp"
#include "muscup/uq/moments.hpp"

namespace muscup {

enum class Decision { accept, reject };

inline const char* to_string(Decision d) {
  return d == Decision::accept ? "accept" : "reject";
}

/// Estimated upper bounds on the error of the interpolated estimators:
///   |E[u] - E[u~]|         <= E|u - u~|
///   |sigma[u] - sigma[u~]| <= sigma|u - u~|
/// both estimated from the leave-one-out sample, and the N_mu-sample MC
/// interval half-widths they are tested against.
struct ErrorBoundReport {
  Field eps_mean_bound;
  Field eps_std_bound;
  Interval ci_mean_bound;
  Interval ci_std_bound;
  Field mc_ci_halfwidth_mean;
  Field mc_ci_halfwidth_std;
  double confidence_level = 0.95;
  std::size_t n_samples = 0;
  Decision decision = Decision::reject;

  /// Spatial means entering the acceptance rule.
  double bound_score_mean() const { return spatial_mean(ci_mean_bound.hi); }
  double bound_score_std() const { return spatial_mean(ci_std_bound.hi); }
  double mc_score_mean() const { return spatial_mean(mc_ci_halfwidth_mean); }
  double mc_score_std() const { return spatial_mean(mc_ci_halfwidth_std); }
};

/// Mean and (N - 1)-divisor standard deviation of |u_i - u~_i| with
/// bootstrap intervals on both.
inline ErrorBoundReport error_bounds(std::span<const Field> u,
                                     std::span<const Field> u_tilde,
                                     const BootstrapConfig& bootstrap) {
  if (u.size() != u_tilde.size())
    throw ConfigError("error_bounds: " + std::to_string(u.size()) +
                      " originals vs " + std::to_string(u_tilde.size()) +
                      " re-runs");
  std::vector<Field> diffs;
  diffs.reserve(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].size() != u_tilde[i].size())
      throw ConfigError("error_bounds: field sizes differ at sample " +
                        std::to_string(i));
    Field d(u[i].grid);
    for (std::size_t k = 0; k < d.size(); ++k)
      d[k] = std::abs(u[i][k] - u_tilde[i][k]);
    diffs.push_back(std::move(d));
  }
  const MomentEstimate m = estimate_moments(diffs, bootstrap);
  ErrorBoundReport r;
  r.eps_mean_bound = m.mean;
  r.eps_std_bound = m.std;
  r.ci_mean_bound = m.ci_mean;
  r.ci_std_bound = m.ci_std;
  r.confidence_level = bootstrap.level;
  r.n_samples = u.size();
  r.mc_ci_halfwidth_mean = Field(m.mean.grid);
  r.mc_ci_halfwidth_std = Field(m.mean.grid);
  return r;
}

/// Accept iff, for both estimators, the spatial mean of the bound's upper
/// interval endpoint is strictly below the spatial mean of the MC interval
/// half-width. Ties reject.
inline Decision interpolation_test(const ErrorBoundReport& r) {
  const bool mean_ok = r.bound_score_mean() < r.mc_score_mean();
  const bool std_ok = r.bound_score_std() < r.mc_score_std();
  return mean_ok && std_ok ? Decision::accept : Decision::reject;
}

}  // namespace muscup
