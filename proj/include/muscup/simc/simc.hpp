#pragma once

// Semi-intrusive Monte Carlo. The micro model runs on N_mu of the N samples;
// the other samples receive micro outputs interpolated over input space and
// run only the macro model. A leave-one-out re-run of the N_mu samples with
// interpolated micro outputs estimates the resulting error, and the
// interpolation test decides between the interpolated estimate and plain MC
// on the N_mu exact samples.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "muscup/core/coupling.hpp"
#include "muscup/core/parallel.hpp"
#include "muscup/simc/error_bounds.hpp"
#include "muscup/simc/interpolator.hpp"
#include "muscup/uq/distribution.hpp"
#include "muscup/uq/ensemble.hpp"
#include "muscup/uq/moments.hpp"

namespace muscup {

enum class Selection { maximin, first };

struct SamplingPlan {
  std::size_t N = 0;
  std::size_t N_mu = 0;
  Selection selection = Selection::maximin;

  void validate(std::size_t input_dimension) const {
    if (N_mu > N)
      throw ConfigError("N_mu (" + std::to_string(N_mu) + ") exceeds N (" +
                        std::to_string(N) + ")");
    if (N_mu < 2) throw ConfigError("N_mu must be at least 2");
    if (N_mu < input_dimension + 2)
      throw ConfigError("N_mu must be at least input dimension + 2");
  }
};

/// Greedy maximin selection in the rows of `points`, starting from row 0.
/// Ties go to the lowest index.
inline std::vector<std::size_t> select_subsample(const Eigen::MatrixXd& points,
                                                 std::size_t N_mu,
                                                 Selection selection = Selection::maximin) {
  const auto N = static_cast<std::size_t>(points.rows());
  if (N_mu > N)
    throw ConfigError("cannot select " + std::to_string(N_mu) + " of " +
                      std::to_string(N) + " samples");
  std::vector<std::size_t> out;
  out.reserve(N_mu);
  if (selection == Selection::first || N_mu == N) {
    for (std::size_t i = 0; i < N_mu; ++i) out.push_back(i);
    return out;
  }
  if (N_mu == 0) return out;
  std::vector<double> dist(N, std::numeric_limits<double>::infinity());
  std::vector<char> taken(N, 0);
  std::size_t next = 0;
  for (std::size_t k = 0; k < N_mu; ++k) {
    out.push_back(next);
    taken[next] = 1;
    std::size_t best = N;
    double best_d = -1.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (taken[i]) continue;
      dist[i] = std::min(
          dist[i], (points.row(static_cast<Eigen::Index>(i)) -
                    points.row(static_cast<Eigen::Index>(next)))
                       .squaredNorm());
      if (dist[i] > best_d) {
        best_d = dist[i];
        best = i;
      }
    }
    next = best;
  }
  return out;
}

// Samples per interpolation product.
inline constexpr std::size_t kRestBlock = 64;

struct SimcOptions {
  MethodOptions method;
  /// Test hook: feed exact micro outputs to every sample instead of
  /// interpolated ones.
  bool exact_micro_for_all = false;
};

struct SimcResult {
  UPResult estimate;          // returned estimate (SIMC, or MC fallback)
  MomentEstimate interpolated;  // SIMC estimate over all N samples
  MomentEstimate subsample_mc;  // MC over the N_mu exact samples
  ErrorBoundReport report;
  bool fallback = false;
  std::vector<std::size_t> subset;
};

template <CoupledProblem P>
SimcResult run_simc(const P& problem, const InputDistribution& dist,
                    const SamplingPlan& plan, std::uint64_t seed,
                    const SimcOptions& opts = {}) {
  plan.validate(dist.dimension());
  const MethodOptions& mo = opts.method;
  SimcResult out;
  UPResult all;  // moments over all N samples
  UPResult sub;  // moments over the N_mu exact samples
  TimingBreakdown& timing = all.timing;
  all.n_samples = plan.N;
  sub.n_samples = plan.N_mu;

  const SampleSet samples = draw_samples(dist, plan.N, seed);
  const Eigen::MatrixXd z = reference_coordinates(dist, samples.inputs);

  std::vector<std::size_t> subset, rest;
  Eigen::MatrixXd centers;
  RowMatrix rest_w;  // cardinal weights of the non-subset samples, one row each
  std::vector<Eigen::VectorXd> loo_w;
  detail::as_overhead(timing, [&] {
    subset = select_subsample(z, plan.N_mu, plan.selection);
    std::vector<char> in_subset(plan.N, 0);
    for (auto i : subset) in_subset[i] = 1;
    for (std::size_t j = 0; j < plan.N; ++j)
      if (!in_subset[j]) rest.push_back(j);
    centers.resize(static_cast<Eigen::Index>(subset.size()), z.cols());
    for (std::size_t a = 0; a < subset.size(); ++a)
      centers.row(static_cast<Eigen::Index>(a)) =
          z.row(static_cast<Eigen::Index>(subset[a]));
    if (!opts.exact_micro_for_all) {
      const CubicRbfBasis basis(centers);
      rest_w.resize(static_cast<Eigen::Index>(rest.size()),
                    static_cast<Eigen::Index>(subset.size()));
      Eigen::RowVectorXd q(z.cols());
      for (std::size_t r = 0; r < rest.size(); ++r) {
        q = z.row(static_cast<Eigen::Index>(rest[r]));
        rest_w.row(static_cast<Eigen::Index>(r)) = basis.cardinal_weights(
            {q.data(), static_cast<std::size_t>(q.size())}).transpose();
      }
    }
    loo_w = loo_weights(centers);
  });
  out.subset = subset;

  const TimeScales scales = problem.scales();
  const std::size_t steps = scales.macro_steps();
  const Field init = problem.initial_state();
  std::vector<Field> states(plan.N, init);
  std::vector<Field> loo_states(plan.N_mu, init);
  std::vector<Field> micro_out(plan.N_mu);
  const auto m_out = static_cast<Eigen::Index>(init.size());
  RowMatrix sub_outputs(static_cast<Eigen::Index>(plan.N_mu), m_out);

  auto gather_subset = [&] {
    std::vector<Field> u;
    u.reserve(subset.size());
    for (auto i : subset) u.push_back(states[i]);
    return u;
  };
  auto record = [&](double t) {
    detail::record_moments(all, mo, t, states);
    if (mo.keep_history) detail::record_moments(sub, mo, t, gather_subset());
    else sub.times.push_back(t);
  };

  detail::as_overhead(timing, [&] { record(0.0); });
  for (std::size_t s = 1; s <= steps; ++s) {
    parallel_for(plan.N_mu, mo.threads, timing,
                 [&](std::size_t a, TimingBreakdown& t) {
                   const auto j = subset[a];
                   micro_out[a] = detail::timed_micro(
                       problem, states[j], samples.row(j), s,
                       static_cast<long>(j), t);
                 });
    if (opts.exact_micro_for_all) {
      parallel_for(rest.size(), mo.threads, timing,
                   [&](std::size_t r, TimingBreakdown& t) {
                     const auto j = rest[r];
                     const auto xi = samples.row(j);
                     const Field v = detail::timed_micro(problem, states[j], xi, s,
                                                         static_cast<long>(j), t);
                     detail::timed_macro(problem, states[j], v, xi, s,
                                         static_cast<long>(j), t);
                   });
    } else {
      detail::as_overhead(timing, [&] {
        for (std::size_t a = 0; a < plan.N_mu; ++a)
          sub_outputs.row(static_cast<Eigen::Index>(a)) =
              Eigen::Map<const Eigen::RowVectorXd>(micro_out[a].data(), m_out);
      });
      // Interpolated micro outputs for a block of samples are one product of
      // their weight rows with the exact outputs.
      const std::size_t blocks = (rest.size() + kRestBlock - 1) / kRestBlock;
      parallel_for(blocks, mo.threads, timing,
                   [&](std::size_t bi, TimingBreakdown& t) {
                     const std::size_t r0 = bi * kRestBlock;
                     const std::size_t len = std::min(kRestBlock, rest.size() - r0);
                     RowMatrix pred;
                     {
                       ScopedTimer timer(t.t_overhead);
                       pred.noalias() = rest_w.middleRows(static_cast<Eigen::Index>(r0),
                                                          static_cast<Eigen::Index>(len)) *
                                        sub_outputs;
                     }
                     Field v(init.grid);
                     for (std::size_t r = r0; r < r0 + len; ++r) {
                       const auto j = rest[r];
                       {
                         ScopedTimer timer(t.t_overhead);
                         const auto row = pred.row(static_cast<Eigen::Index>(r - r0));
                         std::copy(row.data(), row.data() + m_out, v.data());
                       }
                       detail::timed_macro(problem, states[j], v, samples.row(j), s,
                                           static_cast<long>(j), t);
                     }
                   });
    }
    parallel_for(plan.N_mu, mo.threads, timing,
                 [&](std::size_t a, TimingBreakdown& t) {
                   const auto j = subset[a];
                   const auto xi = samples.row(j);
                   TimingBreakdown test;
                   {
                     ScopedTimer timer(test.t_overhead);
                     std::vector<const Field*> others;
                     others.reserve(plan.N_mu - 1);
                     for (std::size_t b = 0; b < plan.N_mu; ++b)
                       if (b != a) others.push_back(&micro_out[b]);
                     const Field v = combine(loo_w[a], others);
                     detail::timed_macro(problem, loo_states[a], v, xi, s,
                                         static_cast<long>(j), test);
                   }
                   t.t_overhead += test.t_overhead;
                   detail::timed_macro(problem, states[j], micro_out[a], xi, s,
                                       static_cast<long>(j), t);
                 });
    detail::as_overhead(timing, [&] { record(scales.time_at(s)); });
  }

  detail::as_overhead(timing, [&] {
    const std::vector<Field> u_sub = gather_subset();
    BootstrapConfig bs = mo.bootstrap;
    out.interpolated = estimate_moments(states, bs);
    out.subsample_mc = estimate_moments(u_sub, bs);
    bs.seed ^= 0x5bd1e995ULL;  // independent resamples for the bounds
    out.report = error_bounds(u_sub, loo_states, bs);
    out.report.mc_ci_halfwidth_mean = out.subsample_mc.ci_mean.half_width();
    out.report.mc_ci_halfwidth_std = out.subsample_mc.ci_std.half_width();
    out.report.decision = interpolation_test(out.report);
  });

  out.fallback = out.report.decision == Decision::reject;
  all.final = out.interpolated;
  sub.final = out.subsample_mc;
  if (out.fallback) {
    sub.timing = all.timing;
    out.estimate = std::move(sub);
  } else {
    out.estimate = std::move(all);
  }
  return out;
}

}  // namespace muscup
