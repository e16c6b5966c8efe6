#pragma once

// Time-major ensemble stepping shared by the sampling-based methods. All
// samples are advanced one macro step at a time; each sample's arithmetic is
// identical to a standalone run_coupled call.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "muscup/core/coupling.hpp"
#include "muscup/core/errors.hpp"
#include "muscup/core/field.hpp"
#include "muscup/core/timing.hpp"
#include "muscup/uq/moments.hpp"

namespace muscup {

struct MethodOptions {
  int threads = 1;
  bool keep_history = true;
  BootstrapConfig bootstrap;
};

/// Output of a sampling or spectral uncertainty propagation run.
struct UPResult {
  std::vector<double> times;
  std::vector<Field> mean_history;  // one per macro time, if kept
  std::vector<Field> std_history;
  MomentEstimate final;  // at the last macro time, with intervals
  TimingBreakdown timing;
  std::size_t n_samples = 0;
};

namespace detail {

[[noreturn]] inline void rethrow_annotated(std::size_t step,
                                           std::span<const double> xi,
                                           long sample) {
  try {
    throw;
  } catch (const SolverError& e) {
    std::string msg = e.what();
    auto pos = msg.rfind(" (step ");
    if (pos != std::string::npos) msg.resize(pos);
    throw SolverError(msg, step, std::vector<double>(xi.begin(), xi.end()),
                      sample);
  }
}

template <CoupledProblem P>
Field timed_micro(const P& p, const Field& state, std::span<const double> xi,
                  std::size_t step, long sample, TimingBreakdown& t) {
  Field v;
  try {
    ScopedTimer timer(t.t_micro);
    v = p.micro(state, xi);
  } catch (const SolverError&) {
    rethrow_annotated(step, xi, sample);
  }
  if (!v.all_finite())
    throw SolverError("non-finite micro output", step,
                      std::vector<double>(xi.begin(), xi.end()), sample);
  return v;
}

template <CoupledProblem P>
void timed_macro(const P& p, Field& state, const Field& micro_out,
                 std::span<const double> xi, std::size_t step, long sample,
                 TimingBreakdown& t) {
  try {
    ScopedTimer timer(t.t_macro);
    state = p.macro(state, micro_out, xi);
  } catch (const SolverError&) {
    rethrow_annotated(step, xi, sample);
  }
  if (!state.all_finite())
    throw SolverError("non-finite macro state", step,
                      std::vector<double>(xi.begin(), xi.end()), sample);
}

/// Runs `fn` sequentially, booking its time as overhead.
template <class Fn>
decltype(auto) as_overhead(TimingBreakdown& t, Fn&& fn) {
  struct Book {
    TimingBreakdown& t;
    Stopwatch w;
    ~Book() {
      const double s = w.seconds();
      t.t_overhead += s;
      t.t_total += s;
    }
  } book{t, {}};
  return fn();
}

/// Per-step moment bookkeeping.
inline void record_moments(UPResult& r, const MethodOptions& opts, double time,
                           std::span<const Field> states) {
  r.times.push_back(time);
  if (!opts.keep_history || states.size() < 2) return;
  Field mean = sample_mean(states);
  r.std_history.push_back(sample_std(states, mean));
  r.mean_history.push_back(std::move(mean));
}

}  // namespace detail
}  // namespace muscup
