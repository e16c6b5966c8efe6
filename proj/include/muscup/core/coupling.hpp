#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "muscup/core/errors.hpp"
#include "muscup/core/field.hpp"
#include "muscup/core/time_scales.hpp"

namespace muscup {

/// Micro map: (state, params, dt_micro, n_micro) -> micro output.
template <class F>
concept MicroMap = requires(const F& f, const Field& s,
                            std::span<const double> xi, double dt, int n) {
  { f(s, xi, dt, n) } -> std::convertible_to<Field>;
};

/// Macro map: (state, micro output, params, dt_macro) -> next state.
template <class F>
concept MacroMap = requires(const F& f, const Field& s, const Field& v,
                            std::span<const double> xi, double dt) {
  { f(s, v, xi, dt) } -> std::convertible_to<Field>;
};

/// A macro/micro model pair bundled with its time scales and initial state.
/// Both maps must be pure.
template <class P>
concept CoupledProblem = requires(const P& p, const Field& s, const Field& v,
                                  std::span<const double> xi) {
  { p.scales() } -> std::convertible_to<TimeScales>;
  { p.initial_state() } -> std::convertible_to<Field>;
  { p.micro(s, xi) } -> std::convertible_to<Field>;
  { p.macro(s, v, xi) } -> std::convertible_to<Field>;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> states;

  std::size_t size() const { return states.size(); }
  const Field& final_state() const { return states.back(); }
};

enum class History { all, final_only };

namespace detail {

inline void check_finite(const Field& f, std::size_t step,
                         std::span<const double> xi, const char* what) {
  const std::size_t bad = f.first_non_finite();
  if (bad != f.size())
    throw SolverError(std::string("non-finite value in ") + what +
                          " output at index " + std::to_string(bad),
                      step, std::vector<double>(xi.begin(), xi.end()));
}

inline void record(Trajectory& traj, History history, double t,
                   const Field& state) {
  if (history == History::all || traj.states.empty()) {
    traj.times.push_back(t);
    traj.states.push_back(state);
  } else {
    traj.times.back() = t;
    traj.states.back() = state;
  }
}

}  // namespace detail

/// Drives the macro time loop, calling the micro model once per macro step:
/// state_{s+1} = macro(state_s, micro(state_s)).
template <MacroMap Macro, MicroMap Micro>
Trajectory run_coupled(const Macro& macro, const Micro& micro,
                       std::span<const double> xi, const TimeScales& scales,
                       const Field& initial, History history = History::all) {
  scales.validate();
  initial.validate();
  const std::size_t steps = scales.macro_steps();
  Trajectory traj;
  if (history == History::all) {
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
  }
  detail::record(traj, history, 0.0, initial);
  Field state = initial;
  for (std::size_t s = 1; s <= steps; ++s) {
    Field v = micro(state, xi, scales.dt_micro, scales.n_micro);
    detail::check_finite(v, s, xi, "micro");
    state = macro(state, v, xi, scales.dt_macro);
    detail::check_finite(state, s, xi, "macro");
    detail::record(traj, history, scales.time_at(s), state);
  }
  return traj;
}

/// Same as run_coupled, with the micro call replaced by a lookup into
/// precomputed outputs (one per macro step).
template <MacroMap Macro>
Trajectory run_coupled_with_injected_micro(const Macro& macro,
                                           std::span<const Field> micro_results,
                                           std::span<const double> xi,
                                           const TimeScales& scales,
                                           const Field& initial,
                                           History history = History::all) {
  scales.validate();
  initial.validate();
  const std::size_t steps = scales.macro_steps();
  if (micro_results.size() != steps)
    throw ConfigError("injected micro outputs: expected " +
                      std::to_string(steps) + " (one per macro step), given " +
                      std::to_string(micro_results.size()));
  Trajectory traj;
  detail::record(traj, history, 0.0, initial);
  Field state = initial;
  for (std::size_t s = 1; s <= steps; ++s) {
    state = macro(state, micro_results[s - 1], xi, scales.dt_macro);
    detail::check_finite(state, s, xi, "macro");
    detail::record(traj, history, scales.time_at(s), state);
  }
  return traj;
}

/// Adapters exposing a CoupledProblem's maps under the generic signatures.
template <CoupledProblem P>
auto micro_map(const P& p) {
  return [&p](const Field& s, std::span<const double> xi, double, int) {
    return p.micro(s, xi);
  };
}

template <CoupledProblem P>
auto macro_map(const P& p) {
  return [&p](const Field& s, const Field& v, std::span<const double> xi,
              double) { return p.macro(s, v, xi); };
}

template <CoupledProblem P>
Trajectory run_coupled(const P& p, std::span<const double> xi,
                       History history = History::all) {
  return run_coupled(macro_map(p), micro_map(p), xi, p.scales(),
                     p.initial_state(), history);
}

/// Records micro outputs of an exact coupled run (one per macro step).
template <CoupledProblem P>
std::vector<Field> collect_micro_outputs(const P& p,
                                         std::span<const double> xi) {
  const TimeScales scales = p.scales();
  std::vector<Field> out;
  out.reserve(scales.macro_steps());
  Field state = p.initial_state();
  for (std::size_t s = 1; s <= scales.macro_steps(); ++s) {
    out.push_back(p.micro(state, xi));
    state = p.macro(state, out.back(), xi);
  }
  return out;
}

}  // namespace muscup
