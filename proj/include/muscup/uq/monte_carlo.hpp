#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "muscup/core/coupling.hpp"
#include "muscup/core/parallel.hpp"
#include "muscup/uq/distribution.hpp"
#include "muscup/uq/ensemble.hpp"
#include "muscup/uq/moments.hpp"

namespace muscup {

/// Black-box Monte Carlo: N independent coupled runs, moments per macro time
/// and bootstrap intervals at the final time.
template <CoupledProblem P>
UPResult run_mc(const P& problem, const InputDistribution& dist, std::size_t N,
                std::uint64_t seed, const MethodOptions& opts = {}) {
  UPResult r;
  r.n_samples = N;
  const SampleSet samples = draw_samples(dist, N, seed);
  const TimeScales scales = problem.scales();
  const std::size_t steps = scales.macro_steps();
  std::vector<Field> states(N, problem.initial_state());

  detail::as_overhead(r.timing, [&] {
    detail::record_moments(r, opts, 0.0, states);
  });
  for (std::size_t s = 1; s <= steps; ++s) {
    parallel_for(N, opts.threads, r.timing,
                 [&](std::size_t j, TimingBreakdown& t) {
                   const auto xi = samples.row(j);
                   const Field v = detail::timed_micro(problem, states[j], xi,
                                                       s, static_cast<long>(j), t);
                   detail::timed_macro(problem, states[j], v, xi, s,
                                       static_cast<long>(j), t);
                 });
    detail::as_overhead(r.timing, [&] {
      detail::record_moments(r, opts, scales.time_at(s), states);
    });
  }
  r.final = detail::as_overhead(
      r.timing, [&] { return estimate_moments(states, opts.bootstrap); });
  return r;
}

}  // namespace muscup
