#pragma once

// Two-dimensional Gray-Scott system on [0, L]^2 with zero-flux boundaries:
//   u_t = Du lap(u) + F (1 - u) - u v^2
//   v_t = Dv lap(v) - (F + k) v + u v^2
// Fields are cell-centered; the state stacks u (component 0) and v
// (component 1). Reaction is the micro model, diffusion the macro model.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>

#include "muscup/core/errors.hpp"
#include "muscup/core/field.hpp"
#include "muscup/core/time_scales.hpp"

namespace muscup::gs {

inline constexpr double kMeanFeed = 0.0385;
inline constexpr double kMeanRate = 0.052;
inline constexpr double kDu = 2e-5;
inline constexpr double kDv = 1e-5;

struct GSParams {
  double F = kMeanFeed;
  double k = kMeanRate;
  double Du = kDu;
  double Dv = kDv;

  static GSParams from_inputs(std::span<const double> xi) {
    if (xi.size() != 2) throw ConfigError("case 2 expects two inputs (F, k)");
    GSParams p;
    p.F = xi[0];
    p.k = xi[1];
    p.validate();
    return p;
  }
  void validate() const {
    if (!(F > 0.0 && k > 0.0 && Du > 0.0 && Dv > 0.0))
      throw ConfigError("Gray-Scott parameters must be positive");
  }
};

struct GSConfig {
  double L = 2.5;
  std::size_t nx = 256;
  std::size_t ny = 256;
  double dt_macro = 1.0;
  double t_end = 5000.0;
  int n_micro = 3;
  double reaction_dt_max = 5.0;  // bound on the explicit reaction substep

  /// Reduced resolution and horizon used for desk-scale studies.
  static GSConfig desk() {
    GSConfig c;
    c.nx = 64;
    c.ny = 64;
    c.dt_macro = 6.0;
    c.t_end = 1500.0;
    return c;
  }

  double dx() const { return L / static_cast<double>(nx); }
  double dy() const { return L / static_cast<double>(ny); }
  TimeScales scales() const {
    return TimeScales::from_macro(dt_macro, n_micro, t_end);
  }

  double cfl(double D) const {
    return D * dt_macro * (1.0 / (dx() * dx()) + 1.0 / (dy() * dy()));
  }

  void validate(double Du = kDu, double Dv = kDv) const {
    if (nx < 2 || ny < 2) throw ConfigError("grid needs at least 2x2 cells");
    scales().validate();
    const double c = cfl(std::max(Du, Dv));
    if (c > 0.5)
      throw CflError("Gray-Scott diffusion CFL " + std::to_string(c) +
                         " exceeds 0.5",
                     c);
    if (scales().dt_micro > reaction_dt_max)
      throw ConfigError("reaction substep exceeds configured bound");
  }
};

inline Grid make_grid(const GSConfig& cfg) {
  const double dx = cfg.dx(), dy = cfg.dy();
  return Grid::plane(cfg.nx, cfg.ny, dx, dy, 0.5 * dx, 0.5 * dy, 2);
}

/// Pointwise initial condition: returns (u, v).
inline std::pair<double, double> initial_value(double x, double y) {
  const bool inside = x >= 0.75 && x <= 1.75 && y >= 0.75 && y <= 1.75;
  if (!inside) return {0.0, 0.0};
  constexpr double pi = std::numbers::pi;
  const double sx = std::sin(4.0 * pi * x), sy = std::sin(4.0 * pi * y);
  const double v = 0.25 * sx * sx * sy * sy;
  return {-2.0 * v + 1.0, v};
}

inline Field gs_init(const Grid& grid) {
  Field f(grid);
  for (std::size_t j = 0; j < grid.ny; ++j)
    for (std::size_t i = 0; i < grid.nx; ++i) {
      auto [u, v] = initial_value(grid.x(i), grid.y(j));
      f[grid.index(i, j, 0)] = u;
      f[grid.index(i, j, 1)] = v;
    }
  return f;
}

namespace detail {

// Explicit step of D * lap(f) with mirrored ghost cells. The neighbour sums
// are grouped per axis so that a transposed input gives a transposed output
// bit for bit on square grids.
inline void diffuse(std::span<const double> in, std::span<double> out,
                    std::size_t nx, std::size_t ny, double rx, double ry) {
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t jm = j == 0 ? 0 : j - 1;
    const std::size_t jp = j + 1 == ny ? j : j + 1;
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t im = i == 0 ? 0 : i - 1;
      const std::size_t ip = i + 1 == nx ? i : i + 1;
      const double c = in[j * nx + i];
      const double ax = (in[j * nx + im] + in[j * nx + ip]) - 2.0 * c;
      const double ay = (in[jm * nx + i] + in[jp * nx + i]) - 2.0 * c;
      out[j * nx + i] = c + (rx * ax + ry * ay);
    }
  }
}

}  // namespace detail

/// Explicit 5-point diffusion step of both components with zero-flux
/// boundaries.
inline Field gs_diffusion_step(const Field& state, const GSParams& p,
                               double dt) {
  const Grid& g = state.grid;
  const double inv = 1.0 / (g.dx * g.dx) + 1.0 / (g.dy * g.dy);
  const double cfl = std::max(p.Du, p.Dv) * dt * inv;
  if (cfl > 0.5)
    throw CflError("Gray-Scott diffusion CFL " + std::to_string(cfl) +
                       " exceeds 0.5",
                   cfl);
  Field out(g);
  const double D[2] = {p.Du, p.Dv};
  for (std::size_t c = 0; c < 2; ++c)
    detail::diffuse(state.component(c), out.component(c), g.nx, g.ny,
                    D[c] * dt / (g.dx * g.dx), D[c] * dt / (g.dy * g.dy));
  return out;
}

/// n_micro explicit Euler substeps of the pointwise reaction ODEs.
inline Field gs_reaction_micro(const Field& state, const GSParams& p,
                               double dt_micro, int n_micro,
                               double dt_max = 5.0) {
  if (!(dt_micro <= dt_max))
    throw ConfigError("reaction substep " + std::to_string(dt_micro) +
                      " exceeds bound " + std::to_string(dt_max));
  Field out = state;
  const Grid& g = state.grid;
  auto u = out.component(0);
  auto v = out.component(1);
  const double Fk = p.F + p.k;
  for (std::size_t idx = 0; idx < g.points(); ++idx) {
    double uu = u[idx], vv = v[idx];
    for (int s = 0; s < n_micro; ++s) {
      const double uvv = uu * vv * vv;
      const double du = p.F * (1.0 - uu) - uvv;
      const double dv = uvv - Fk * vv;
      uu += dt_micro * du;
      vv += dt_micro * dv;
    }
    if (!std::isfinite(uu) || !std::isfinite(vv))
      throw SolverError("non-finite Gray-Scott reaction at cell (" +
                            std::to_string(idx % g.nx) + ", " +
                            std::to_string(idx / g.nx) + ")",
                        0, {p.F, p.k});
    u[idx] = uu;
    v[idx] = vv;
  }
  return out;
}

class GrayScott {
 public:
  explicit GrayScott(const GSConfig& cfg)
      : cfg_(cfg), grid_(make_grid(cfg)), scales_(cfg.scales()) {}

  const GSConfig& config() const { return cfg_; }
  const Grid& grid() const { return grid_; }
  TimeScales scales() const { return scales_; }
  Field initial_state() const { return gs_init(grid_); }
  std::size_t input_dimension() const { return 2; }

  Field micro(const Field& state, std::span<const double> xi) const {
    const GSParams p = GSParams::from_inputs(xi);
    Field reacted = gs_reaction_micro(state, p, scales_.dt_micro,
                                      scales_.n_micro, cfg_.reaction_dt_max);
    for (std::size_t i = 0; i < reacted.size(); ++i) reacted[i] -= state[i];
    return reacted;
  }

  Field macro(const Field& state, const Field& micro_out,
              std::span<const double> xi) const {
    const GSParams p = GSParams::from_inputs(xi);
    return gs_diffusion_step(state + micro_out, p, scales_.dt_macro);
  }

 private:
  GSConfig cfg_;
  Grid grid_;
  TimeScales scales_;
};

}  // namespace muscup::gs
