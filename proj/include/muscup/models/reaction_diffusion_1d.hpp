#pragma once

// Linear 1D reaction-diffusion benchmark:
//   du/dt = d * u_xx + k * u,  x in [0, 1) periodic,
//   u(x, 0) = sin(pi (4x - 0.5)) + 1.
// Diffusion is the slow macro model, the reaction the fast micro model.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include "muscup/core/errors.hpp"
#include "muscup/core/field.hpp"
#include "muscup/core/time_scales.hpp"

namespace muscup::rd1d {

struct Params1D {
  double d = 0.0;  // diffusion coefficient
  double k = 0.0;  // reaction coefficient

  static Params1D from_inputs(std::span<const double> xi) {
    if (xi.size() != 2) throw ConfigError("case 1 expects two inputs (d, k)");
    Params1D p{xi[0], xi[1]};
    p.validate();
    return p;
  }
  void validate() const {
    if (!(d > 0.0)) throw ConfigError("diffusion coefficient must be positive");
    if (!std::isfinite(k)) throw ConfigError("reaction coefficient not finite");
  }
};

inline constexpr double kMeanDiffusion = 0.405;

/// Mean reaction rate tied to the diffusion time scale of one grid cell:
/// E[k] = n_micro * E[d] / dx^2.
inline double mean_reaction(int n_micro, double dx,
                            double mean_d = kMeanDiffusion) {
  return n_micro * mean_d / (dx * dx);
}

struct ModelConfig1D {
  double dx = 1e-2;
  int n_micro = 100;
  double dt_macro = 0.0;
  double t_end = 0.0;

  /// Default horizon: 20 macro steps with E[k] * t_end = 1, so the solution
  /// grows by about e over the run and stays representable for any n_micro.
  static ModelConfig1D defaults(int n_micro, double dx = 1e-2,
                                double mean_d = kMeanDiffusion) {
    ModelConfig1D c;
    c.dx = dx;
    c.n_micro = n_micro;
    c.dt_macro = dx * dx / (20.0 * n_micro * mean_d);
    c.t_end = 20.0 * c.dt_macro;
    return c;
  }

  TimeScales scales() const {
    return TimeScales::from_macro(dt_macro, n_micro, t_end);
  }

  std::size_t points() const {
    return static_cast<std::size_t>(std::lround(1.0 / dx));
  }

  /// Stability of the explicit diffusion step for the largest diffusivity.
  void validate(double max_d) const {
    if (!(dx > 0.0)) throw ConfigError("dx must be positive");
    if (std::abs(points() * dx - 1.0) > 1e-9)
      throw ConfigError("dx must divide the unit interval");
    scales().validate();
    const double cfl = max_d * dt_macro / (dx * dx);
    if (cfl > 0.5)
      throw CflError("diffusion CFL number " + std::to_string(cfl) +
                         " exceeds 0.5",
                     cfl);
  }
};

inline Grid make_grid(double dx) {
  return Grid::line(static_cast<std::size_t>(std::lround(1.0 / dx)), dx);
}

inline double initial_value(double x) {
  return std::sin(std::numbers::pi * (4.0 * x - 0.5)) + 1.0;
}

inline Field init_1d(const Grid& grid) {
  Field f(grid);
  for (std::size_t i = 0; i < grid.nx; ++i) f[i] = initial_value(grid.x(i));
  return f;
}

inline double cfl_number(double d, double dt, double dx) {
  return d * dt / (dx * dx);
}

/// One explicit centered-difference diffusion step with periodic wraparound.
inline Field diffusion_step_1d(const Field& state, const Params1D& p,
                               double dt) {
  const double r = cfl_number(p.d, dt, state.grid.dx);
  if (r > 0.5)
    throw CflError("diffusion CFL number " + std::to_string(r) +
                       " exceeds 0.5",
                   r);
  const std::size_t n = state.size();
  Field out(state.grid);
  const double* u = state.data();
  double* o = out.data();
  o[0] = u[0] + r * (u[n - 1] - 2.0 * u[0] + u[1 % n]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    o[i] = u[i] + r * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
  if (n > 1) o[n - 1] = u[n - 1] + r * (u[n - 2] - 2.0 * u[n - 1] + u[0]);
  return out;
}

/// n_micro explicit Euler substeps of du/dt = k u, i.e. u * (1 + k dt)^n.
/// The substeps are applied one by one so n_micro sets the micro cost.
inline Field reaction_micro_1d(const Field& state, const Params1D& p,
                               double dt_micro, int n_micro) {
  const double g = p.k * dt_micro;
  if (!(std::abs(g) < 1.0))
    throw ConfigError("reaction step k*dt_micro = " + std::to_string(g) +
                      " violates |k dt| < 1");
  const double factor = 1.0 + g;
  Field out = state;
  double* u = out.data();
  const std::size_t n = out.size();
  for (int s = 0; s < n_micro; ++s)
    for (std::size_t i = 0; i < n; ++i) u[i] *= factor;
  return out;
}

/// Exact continuum solution for the initial condition above.
inline double analytic_solution_1d(double x, double t, const Params1D& p) {
  constexpr double pi = std::numbers::pi;
  return std::exp(p.k * t) +
         std::exp((p.k - 16.0 * pi * pi * p.d) * t) *
             std::sin(4.0 * pi * x - 0.5 * pi);
}

/// Coupled problem: the micro model returns the reaction increment over one
/// macro step, the macro model diffuses state + increment.
class ReactionDiffusion1D {
 public:
  explicit ReactionDiffusion1D(const ModelConfig1D& cfg)
      : cfg_(cfg), grid_(make_grid(cfg.dx)), scales_(cfg.scales()) {}

  const ModelConfig1D& config() const { return cfg_; }
  const Grid& grid() const { return grid_; }
  TimeScales scales() const { return scales_; }
  Field initial_state() const { return init_1d(grid_); }
  std::size_t input_dimension() const { return 2; }

  Field micro(const Field& state, std::span<const double> xi) const {
    const Params1D p = Params1D::from_inputs(xi);
    Field reacted =
        reaction_micro_1d(state, p, scales_.dt_micro, scales_.n_micro);
    for (std::size_t i = 0; i < reacted.size(); ++i) reacted[i] -= state[i];
    return reacted;
  }

  Field macro(const Field& state, const Field& micro_out,
              std::span<const double> xi) const {
    const Params1D p = Params1D::from_inputs(xi);
    return diffusion_step_1d(state + micro_out, p, scales_.dt_macro);
  }

 private:
  ModelConfig1D cfg_;
  Grid grid_;
  TimeScales scales_;
};

}  // namespace muscup::rd1d
