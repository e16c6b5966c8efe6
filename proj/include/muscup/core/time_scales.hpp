#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "muscup/core/errors.hpp"

namespace muscup {

/// Macro/micro time stepping with dt_macro == n_micro * dt_micro.
struct TimeScales {
  double dt_macro = 0.0;
  double dt_micro = 0.0;
  int n_micro = 1;
  double t_end = 0.0;

  static TimeScales from_macro(double dt_macro, int n_micro, double t_end) {
    TimeScales s{dt_macro, dt_macro / n_micro, n_micro, t_end};
    s.validate();
    return s;
  }

  void validate() const {
    if (!(dt_macro > 0.0) || !(dt_micro > 0.0))
      throw ConfigError("time steps must be positive");
    if (n_micro < 1) throw ConfigError("n_micro must be positive");
    // Only the touching-scales case dt_macro == n_micro * dt_micro is supported.
    const double expect = n_micro * dt_micro;
    if (std::abs(dt_macro - expect) > 1e-12 * std::abs(dt_macro))
      throw ConfigError("dt_macro must equal n_micro * dt_micro (got " +
                        std::to_string(dt_macro) + " vs " +
                        std::to_string(expect) + ")");
    if (!(t_end >= dt_macro * (1.0 - 1e-12)))
      throw ConfigError("t_end must be at least dt_macro");
  }

  /// Number of macro steps; the run ends at the largest multiple of dt_macro
  /// not exceeding t_end.
  std::size_t macro_steps() const {
    return static_cast<std::size_t>(std::floor(t_end / dt_macro * (1.0 + 1e-12)));
  }

  double time_at(std::size_t step) const {
    return static_cast<double>(step) * dt_macro;
  }
};

}  // namespace muscup
