#pragma once

// Polynomial-chaos propagation for the two benchmark models: the fully
// intrusive stochastic Galerkin solvers, and the coupled scheme that keeps
// the micro model intrusive while running the macro model per quadrature
// node and re-projecting after every macro step.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "muscup/core/coupling.hpp"
#include "muscup/core/parallel.hpp"
#include "muscup/core/timing.hpp"
#include "muscup/models/gray_scott.hpp"
#include "muscup/models/reaction_diffusion_1d.hpp"
#include "muscup/pc/basis.hpp"
#include "muscup/pc/expansion.hpp"
#include "muscup/uq/distribution.hpp"
#include "muscup/uq/ensemble.hpp"

namespace muscup {

inline constexpr double kPcBlowup = 1e6;

struct PCResult {
  UPResult estimate;  // intervals collapse onto the point estimates
  PCExpansion final;
};

namespace detail {

inline void record_pc(UPResult& r, const MethodOptions& opts, double t,
                      const PCExpansion& e) {
  r.times.push_back(t);
  if (!opts.keep_history) return;
  auto [mean, sd] = moments_from_pc(e);
  r.mean_history.push_back(std::move(mean));
  r.std_history.push_back(std::move(sd));
}

inline void finish_pc(PCResult& out, const PCExpansion& e) {
  auto [mean, sd] = moments_from_pc(e);
  MomentEstimate m;
  m.mean = mean;
  m.std = sd;
  m.ci_mean = {mean, mean};
  m.ci_std = {sd, sd};
  out.estimate.final = std::move(m);
  out.final = e;
}

inline void check_pc(const PCExpansion& e, std::size_t step) {
  if (!e.all_finite())
    throw SolverError("non-finite PC coefficients", step);
  const double norm = e.coeffs.cwiseAbs().maxCoeff();
  if (norm > kPcBlowup)
    throw SolverError("PC coefficient magnitude " + std::to_string(norm) +
                          " exceeds " + std::to_string(kPcBlowup),
                      step);
}

inline void require_two_inputs(const InputDistribution& dist, const PCBasis& basis) {
  if (dist.dimension() != 2 || basis.dimension() != 2)
    throw ConfigError("PC solvers expect two inputs and a two-dimensional basis");
}

// Periodic second difference of every coefficient row.
inline PCMatrix periodic_laplacian_rows(const PCMatrix& w) {
  const Eigen::Index m = w.cols();
  PCMatrix out(w.rows(), m);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index k = 0; k < m; ++k)
      out(i, k) = w(i, (k + m - 1) % m) - 2.0 * w(i, k) + w(i, (k + 1) % m);
  return out;
}

}  // namespace detail

/// Intrusive reaction over one macro step for case 1: n_micro Euler substeps
/// of dU/dt = k U in coefficient space. Returns the increment.
class Rd1dPCMicro {
 public:
  Rd1dPCMicro(const rd1d::ModelConfig1D& cfg, const InputDistribution& dist,
              const PCBasis& basis)
      : basis_(basis), k_(input_expansion(basis, dist, 1)),
        dt_(cfg.scales().dt_micro), n_(cfg.n_micro) {
    const double kmax = std::max(std::abs(dist[1].lower()), std::abs(dist[1].upper()));
    if (!(kmax * dt_ < 1.0))
      throw ConfigError("reaction step k*dt_micro = " + std::to_string(kmax * dt_) +
                        " violates |k dt| < 1");
  }

  PCExpansion operator()(const PCExpansion& u) const {
    PCMatrix r = u.coeffs;
    for (int s = 0; s < n_; ++s) r += dt_ * galerkin_product(basis_, k_, r);
    return PCExpansion{u.grid, r - u.coeffs};
  }

 private:
  const PCBasis& basis_;
  PCMatrix k_;
  double dt_;
  int n_;
};

/// Intrusive Gray-Scott reaction over one macro step; uv^2 is formed by two
/// truncated products.
class GrayScottPCMicro {
 public:
  GrayScottPCMicro(const gs::GSConfig& cfg, const InputDistribution& dist,
                   const PCBasis& basis)
      : basis_(basis), F_(input_expansion(basis, dist, 0)),
        Fk_(F_ + input_expansion(basis, dist, 1)),
        dt_(cfg.scales().dt_micro), n_(cfg.n_micro) {
    if (!(dt_ <= cfg.reaction_dt_max))
      throw ConfigError("reaction substep exceeds configured bound");
  }

  PCExpansion operator()(const PCExpansion& state) const {
    const Eigen::Index pts = static_cast<Eigen::Index>(state.grid.points());
    PCMatrix u = state.coeffs.leftCols(pts), v = state.coeffs.rightCols(pts);
    for (int s = 0; s < n_; ++s) {
      const PCMatrix uvv = galerkin_product(basis_, galerkin_product(basis_, u, v), v);
      PCMatrix one_minus_u = -u;
      one_minus_u.row(0).array() += 1.0;
      const PCMatrix du = galerkin_product(basis_, F_, one_minus_u) - uvv;
      const PCMatrix dv = uvv - galerkin_product(basis_, Fk_, v);
      u += dt_ * du;
      v += dt_ * dv;
    }
    PCExpansion inc{state.grid, PCMatrix(state.coeffs.rows(), state.coeffs.cols())};
    inc.coeffs.leftCols(pts) = u - state.coeffs.leftCols(pts);
    inc.coeffs.rightCols(pts) = v - state.coeffs.rightCols(pts);
    return inc;
  }

 private:
  const PCBasis& basis_;
  PCMatrix F_, Fk_;
  double dt_;
  int n_;
};

/// Stochastic Galerkin solver for case 1: the diffusion step multiplies the
/// per-coefficient Laplacian by the expansion of d.
inline PCResult galerkin_run_1d(const rd1d::ModelConfig1D& cfg, const InputDistribution& dist,
                                const PCBasis& basis, const MethodOptions& opts = {}) {
  detail::require_two_inputs(dist, basis);
  cfg.validate(dist[0].upper());
  const Rd1dPCMicro micro(cfg, dist, basis);
  const PCMatrix D = input_expansion(basis, dist, 0);
  const TimeScales scales = cfg.scales();
  const double r = scales.dt_macro / (cfg.dx * cfg.dx);

  PCResult out;
  UPResult& res = out.estimate;
  PCExpansion u = PCExpansion::deterministic(rd1d::init_1d(rd1d::make_grid(cfg.dx)), basis.size());
  detail::as_overhead(res.timing, [&] { detail::record_pc(res, opts, 0.0, u); });
  for (std::size_t s = 1; s <= scales.macro_steps(); ++s) {
    Stopwatch w;
    const PCExpansion v = micro(u);
    const double tm = w.seconds();
    w.restart();
    const PCMatrix wv = u.coeffs + v.coeffs;
    u.coeffs = wv + r * galerkin_product(basis, D, detail::periodic_laplacian_rows(wv));
    const double tM = w.seconds();
    res.timing.t_micro += tm;
    res.timing.t_macro += tM;
    res.timing.t_total += tm + tM;
    detail::check_pc(u, s);
    detail::as_overhead(res.timing, [&] { detail::record_pc(res, opts, scales.time_at(s), u); });
  }
  detail::finish_pc(out, u);
  return out;
}

/// Stochastic Galerkin solver for Gray-Scott (deterministic diffusivities).
inline PCResult galerkin_run_gs(const gs::GSConfig& cfg, const InputDistribution& dist,
                                const PCBasis& basis, const MethodOptions& opts = {}) {
  detail::require_two_inputs(dist, basis);
  cfg.validate();
  const GrayScottPCMicro micro(cfg, dist, basis);
  const TimeScales scales = cfg.scales();
  const Grid grid = gs::make_grid(cfg);
  const std::size_t pts = grid.points();
  const double rx[2] = {gs::kDu * scales.dt_macro / (grid.dx * grid.dx),
                        gs::kDv * scales.dt_macro / (grid.dx * grid.dx)};
  const double ry[2] = {gs::kDu * scales.dt_macro / (grid.dy * grid.dy),
                        gs::kDv * scales.dt_macro / (grid.dy * grid.dy)};

  PCResult out;
  UPResult& res = out.estimate;
  PCExpansion u = PCExpansion::deterministic(gs::gs_init(grid), basis.size());
  detail::as_overhead(res.timing, [&] { detail::record_pc(res, opts, 0.0, u); });
  for (std::size_t s = 1; s <= scales.macro_steps(); ++s) {
    Stopwatch w;
    const PCExpansion v = micro(u);
    const double tm = w.seconds();
    w.restart();
    const PCMatrix wv = u.coeffs + v.coeffs;
    for (Eigen::Index i = 0; i < wv.rows(); ++i)
      for (std::size_t c = 0; c < 2; ++c)
        gs::detail::diffuse({wv.row(i).data() + c * pts, pts},
                            {u.coeffs.row(i).data() + c * pts, pts}, grid.nx, grid.ny,
                            rx[c], ry[c]);
    const double tM = w.seconds();
    res.timing.t_micro += tm;
    res.timing.t_macro += tM;
    res.timing.t_total += tm + tM;
    detail::check_pc(u, s);
    detail::as_overhead(res.timing, [&] { detail::record_pc(res, opts, scales.time_at(s), u); });
  }
  detail::finish_pc(out, u);
  return out;
}

/// Coupled PC: intrusive micro step, macro step evaluated at every
/// quadrature node and projected back onto the basis.
template <CoupledProblem P, class Micro>
PCResult coupled_pc_run(const P& problem, const Micro& micro, const InputDistribution& dist,
                        const PCBasis& basis, const MethodOptions& opts = {}) {
  detail::require_two_inputs(dist, basis);
  const TimeScales scales = problem.scales();
  const Field init = problem.initial_state();
  const Grid grid = init.grid;
  const Eigen::MatrixXd& z = basis.nodes();
  const auto Q = static_cast<std::size_t>(z.rows());
  std::vector<std::vector<double>> xi(Q);
  for (std::size_t k = 0; k < Q; ++k) {
    const Eigen::RowVectorXd zk = z.row(static_cast<Eigen::Index>(k));
    xi[k] = physical_point(dist, {zk.data(), static_cast<std::size_t>(zk.size())});
  }

  PCResult out;
  UPResult& res = out.estimate;
  PCExpansion u = PCExpansion::deterministic(init, basis.size());
  detail::as_overhead(res.timing, [&] { detail::record_pc(res, opts, 0.0, u); });
  const auto m = static_cast<Eigen::Index>(grid.size());
  for (std::size_t s = 1; s <= scales.macro_steps(); ++s) {
    PCExpansion v;
    {
      Stopwatch w;
      v = micro(u);
      res.timing.t_micro += w.seconds();
      res.timing.t_total += w.seconds();
    }
    PCMatrix state_nodes, v_nodes;
    detail::as_overhead(res.timing, [&] {
      state_nodes = evaluate_at_nodes(u, basis);
      v_nodes = evaluate_at_nodes(v, basis);
    });
    parallel_for(Q, opts.threads, res.timing, [&](std::size_t k, TimingBreakdown& t) {
      const auto kk = static_cast<Eigen::Index>(k);
      const Field sk(grid, std::vector<double>(state_nodes.row(kk).data(),
                                               state_nodes.row(kk).data() + m));
      const Field vk(grid, std::vector<double>(v_nodes.row(kk).data(),
                                               v_nodes.row(kk).data() + m));
      Field next;
      {
        ScopedTimer timer(t.t_macro);
        next = problem.macro(sk, vk, xi[k]);
      }
      state_nodes.row(kk) = Eigen::Map<const Eigen::RowVectorXd>(next.data(), m);
    });
    detail::as_overhead(res.timing, [&] { u = project_nodal(state_nodes, grid, basis); });
    detail::check_pc(u, s);
    detail::as_overhead(res.timing, [&] { detail::record_pc(res, opts, scales.time_at(s), u); });
  }
  detail::finish_pc(out, u);
  return out;
}

inline PCResult coupled_pc_run_1d(const rd1d::ModelConfig1D& cfg, const InputDistribution& dist,
                                  const PCBasis& basis, const MethodOptions& opts = {}) {
  cfg.validate(dist[0].upper());
  const rd1d::ReactionDiffusion1D model(cfg);
  return coupled_pc_run(model, Rd1dPCMicro(cfg, dist, basis), dist, basis, opts);
}

inline PCResult coupled_pc_run_gs(const gs::GSConfig& cfg, const InputDistribution& dist,
                                  const PCBasis& basis, const MethodOptions& opts = {}) {
  cfg.validate();
  const gs::GrayScott model(cfg);
  return coupled_pc_run(model, GrayScottPCMicro(cfg, dist, basis), dist, basis, opts);
}

}  // namespace muscup
