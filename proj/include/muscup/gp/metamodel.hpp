#pragma once

// Uncertainty propagation with a GP metamodel of the micro model. A training
// design of N_meta inputs is run through the full coupled model; at every
// macro step a GP over the step's micro outputs (shared hyperparameters)
// replaces the micro model for the N sampled inputs.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "muscup/core/coupling.hpp"
#include "muscup/core/parallel.hpp"
#include "muscup/gp/gp.hpp"
#include "muscup/simc/interpolator.hpp"
#include "muscup/simc/simc.hpp"
#include "muscup/uq/distribution.hpp"
#include "muscup/uq/ensemble.hpp"

namespace muscup {

enum class GPDesign {
  automatic,    // tensor grid when N_meta = m^n, maximin otherwise
  sample_points  // train on the N sampled inputs themselves
};

/// Training inputs in reference coordinates ([-1, 1] per active dimension).
inline Eigen::MatrixXd gp_training_design(std::size_t n_active, std::size_t N_meta,
                                          std::uint64_t seed) {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(N_meta),
                    static_cast<Eigen::Index>(n_active));
  if (n_active == 0) return z;
  const auto m = static_cast<std::size_t>(
      std::lround(std::pow(static_cast<double>(N_meta), 1.0 / static_cast<double>(n_active))));
  std::size_t total = 1;
  for (std::size_t i = 0; i < n_active; ++i) total *= m;
  if (m >= 2 && total == N_meta) {
    for (std::size_t p = 0; p < N_meta; ++p) {
      std::size_t rem = p;
      for (std::size_t i = 0; i < n_active; ++i) {
        z(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) =
            -1.0 + 2.0 * static_cast<double>(rem % m) / static_cast<double>(m - 1);
        rem /= m;
      }
    }
    return z;
  }
  const std::size_t n_cand = 64 * N_meta;
  Eigen::MatrixXd cand(static_cast<Eigen::Index>(n_cand), static_cast<Eigen::Index>(n_active));
  for (std::size_t j = 0; j < n_cand; ++j)
    for (std::size_t i = 0; i < n_active; ++i)
      cand(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          -1.0 + 2.0 * counter_uniform(seed ^ 0x6770ULL, j, i);
  const auto idx = select_subsample(cand, N_meta);
  for (std::size_t p = 0; p < N_meta; ++p)
    z.row(static_cast<Eigen::Index>(p)) = cand.row(static_cast<Eigen::Index>(idx[p]));
  return z;
}

/// Physical inputs for reference coordinates of the active dimensions.
inline RowMatrix physical_inputs(const InputDistribution& dist, const Eigen::MatrixXd& z) {
  const auto active = dist.active_dimensions();
  RowMatrix x(z.rows(), static_cast<Eigen::Index>(dist.dimension()));
  for (Eigen::Index j = 0; j < z.rows(); ++j) {
    for (std::size_t i = 0; i < dist.dimension(); ++i) x(j, static_cast<Eigen::Index>(i)) = dist[i].mean;
    for (std::size_t a = 0; a < active.size(); ++a)
      x(j, static_cast<Eigen::Index>(active[a])) =
          dist.from_reference(active[a], z(j, static_cast<Eigen::Index>(a)));
  }
  return x;
}

struct MetamodelOptions {
  MethodOptions method;
  GPConfig gp;
  GPDesign design = GPDesign::automatic;
};

struct MetamodelResult {
  UPResult estimate;
  GPHyperparameters hyper;
  double nugget = 0.0;
  double log_likelihood = 0.0;
  Eigen::MatrixXd design;  // reference coordinates of the training inputs
  /// GP over the micro outputs of the last macro step.
  std::optional<GPModel> final_step_model;
};

template <CoupledProblem P>
MetamodelResult run_metamodel_up(const P& problem, const InputDistribution& dist,
                                 std::size_t N, std::uint64_t seed,
                                 const MetamodelOptions& opts = {}) {
  const MethodOptions& mo = opts.method;
  MetamodelResult out;
  UPResult& r = out.estimate;
  r.n_samples = N;
  TimingBreakdown& timing = r.timing;

  const SampleSet samples = draw_samples(dist, N, seed);
  const Eigen::MatrixXd z = reference_coordinates(dist, samples.inputs);
  const std::size_t n_active = static_cast<std::size_t>(z.cols());

  RowMatrix train_x;
  detail::as_overhead(timing, [&] {
    if (opts.design == GPDesign::sample_points) {
      out.design = z;
    } else {
      opts.gp.validate();
      out.design = gp_training_design(n_active, opts.gp.N_meta, opts.gp.seed);
    }
    train_x = physical_inputs(dist, out.design);
  });
  const auto M = static_cast<std::size_t>(out.design.rows());
  const TimeScales scales = problem.scales();
  const std::size_t steps = scales.macro_steps();
  const Field init = problem.initial_state();

  // Advances the training runs one macro step, leaving micro outputs in `v`.
  std::vector<Field> train(M, init), v(M);
  auto train_step = [&](std::size_t s) {
    parallel_for(M, mo.threads, timing, [&](std::size_t a, TimingBreakdown& t) {
      const auto xi = std::span<const double>(train_x.data() + a * train_x.cols(),
                                              static_cast<std::size_t>(train_x.cols()));
      v[a] = detail::timed_micro(problem, train[a], xi, s, static_cast<long>(a), t);
      detail::timed_macro(problem, train[a], v[a], xi, s, static_cast<long>(a), t);
    });
  };

  // Pass 1: accumulate the likelihood's Gram matrix over all steps.
  std::vector<Eigen::VectorXd> weights(N);
  if (n_active == 0) {
    for (auto& w : weights) w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(M), 1.0 / static_cast<double>(M));
  } else {
    GPHyperparameters hyper;
    if (opts.gp.fixed) {
      hyper = *opts.gp.fixed;
    } else {
      GramAccumulator acc(M);
      for (std::size_t s = 1; s <= steps; ++s) {
        train_step(s);
        detail::as_overhead(timing, [&] { acc.add(v); });
      }
      detail::as_overhead(timing, [&] {
        if (acc.columns() == 0.0) {
          hyper.lengthscales.assign(n_active, 1.0);
        } else {
          auto fit = optimize_hyperparameters(out.design, acc, opts.gp);
          hyper = fit.hyper;
          out.log_likelihood = fit.log_likelihood;
        }
      });
      std::fill(train.begin(), train.end(), init);
    }
    detail::as_overhead(timing, [&] {
      const GPFactor factor = factorize_kernel(out.design, hyper, opts.gp.nugget);
      out.nugget = factor.nugget;
      const detail::GpRows x = out.design;
      Eigen::VectorXd k(static_cast<Eigen::Index>(M));
      Eigen::RowVectorXd q(static_cast<Eigen::Index>(n_active));
      for (std::size_t j = 0; j < N; ++j) {
        q = z.row(static_cast<Eigen::Index>(j));
        for (std::size_t a = 0; a < M; ++a)
          k(static_cast<Eigen::Index>(a)) = se_kernel(
              {q.data(), n_active}, detail::row_span(x, static_cast<Eigen::Index>(a)), hyper);
        // Posterior mean around the sample mean as effective weights on the
        // raw training outputs.
        Eigen::VectorXd lambda = factor.llt.solve(k);
        lambda.array() += (1.0 - lambda.sum()) / static_cast<double>(M);
        weights[j] = std::move(lambda);
      }
    });
    out.hyper = hyper;
  }

  // Pass 2: training runs again, sampled runs with GP micro predictions.
  std::vector<Field> states(N, init);
  std::vector<const Field*> v_ptrs(M);
  for (std::size_t a = 0; a < M; ++a) v_ptrs[a] = &v[a];
  detail::as_overhead(timing, [&] { detail::record_moments(r, mo, 0.0, states); });
  for (std::size_t s = 1; s <= steps; ++s) {
    train_step(s);
    parallel_for(N, mo.threads, timing, [&](std::size_t j, TimingBreakdown& t) {
      const auto xi = samples.row(j);
      Field pred;
      {
        ScopedTimer timer(t.t_micro);
        pred = combine(weights[j], v_ptrs);
      }
      detail::timed_macro(problem, states[j], pred, xi, s, static_cast<long>(j), t);
    });
    detail::as_overhead(timing, [&] {
      detail::record_moments(r, mo, scales.time_at(s), states);
      if (s == steps && n_active > 0)
        out.final_step_model.emplace(out.design, out.hyper, opts.gp.nugget, v);
    });
  }
  r.final = detail::as_overhead(timing, [&] { return estimate_moments(states, mo.bootstrap); });
  return out;
}

}  // namespace muscup
