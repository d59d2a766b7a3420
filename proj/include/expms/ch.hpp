#pragma once

#include <cmath>
#include <map>

#include "expms/damping.hpp"
#include "expms/grid.hpp"
#include "expms/newton.hpp"

namespace expms {

/// Fluid velocity u of the Camassa-Holm equation on a periodic grid.
struct CHField {
  Grid1D grid;
  VectorXd u;
  double t = 0.0;
};

namespace detail {

// The cell-centered Camassa-Holm box stencil.  With P = D^gamma u and
// v = A^gamma u at the nodes, U = A_x v on the cells, the residual of cell n
// reads (everything centered at x_{n+1/2}):
//
//   lin(P)_n + 3/(4 dx) (U_{n+1}^2 - U_{n-1}^2)
//     - 3 cd_n lap_n + (p_{n-1} + p_n)/2 - aU_n d3_n = 0
//
//   lin(f)_n = (f_{n-1} + 3 f_n + 3 f_{n+1} + f_{n+2})/8
//              - (Af_{n-1} - 2 Af_n + Af_{n+1})/dx^2,   Af = A_x f
//   cd_n  = (U_{n+1} - U_{n-1})/(2 dx)
//   lap_n = (U_{n-1} - 2 U_n + U_{n+1})/dx^2
//   p_c   = (U_{c+1} - U_c)/dx * (v_c - 2 v_{c+1} + v_{c+2})/dx^2
//   aU_n  = (U_{n-1} + 2 U_n + U_{n+1})/4
//   d3_n  = (v_{n+2} - 3 v_{n+1} + 3 v_n - v_{n-1})/dx^3
//
// Every term pairs factors centered at the same point, which is what makes
// the cell sums telescope and the e^theta-weighted Casimir exact.

struct ChStepContext {
  DampingCoefficient gamma;
  Grid1D grid;
  double t = 0.0, dt = 0.0, t_half = 0.0;
  ExponentialWeights w;
  bool baseline = false;
  double gamma_half = 0.0;
};

inline ChStepContext make_ch_context(const DampingCoefficient& gamma, const Grid1D& grid, double t,
                                     double dt, bool baseline) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_ch: dt must be positive");
  if (grid.boundary != Boundary::periodic) {
    throw ConfigurationError("the Camassa-Holm stepper requires a periodic boundary");
  }
  ChStepContext ctx;
  ctx.gamma = gamma;
  ctx.grid = grid;
  ctx.t = t;
  ctx.dt = dt;
  ctx.t_half = t + 0.5 * dt;
  ctx.baseline = baseline;
  ctx.w = baseline ? ExponentialWeights::identity(t, dt) : exp_weights(gamma, t, dt);
  ctx.gamma_half = baseline ? gamma(ctx.t_half) : 0.0;
  return ctx;
}

/// lin(f)_n: the u - u_xx stencil at the cell center.
inline VectorXd ch_linear_part(const VectorXd& f, const Grid1D& grid) {
  const int N = grid.n_nodes;
  const double dx2 = grid.dx() * grid.dx();
  const VectorXd Af = avg_forward(f, grid);
  VectorXd out(N);
  for (int n = 0; n < N; ++n) {
    out[n] = (at(f, grid, n - 1) + 3.0 * f[n] + 3.0 * at(f, grid, n + 1) + at(f, grid, n + 2)) / 8.0 -
             (at(Af, grid, n - 1) - 2.0 * Af[n] + at(Af, grid, n + 1)) / dx2;
  }
  return out;
}

/// Nonlinear cell terms as a function of v = A^gamma u.
inline VectorXd ch_nonlinear_part(const VectorXd& v, const Grid1D& grid) {
  const int N = grid.n_nodes;
  const double dx = grid.dx();
  const double dx2 = dx * dx, dx3 = dx2 * dx;
  const VectorXd U = avg_forward(v, grid);
  VectorXd p(N);
  for (int c = 0; c < N; ++c) {
    p[c] = (at(U, grid, c + 1) - U[c]) / dx * (v[c] - 2.0 * at(v, grid, c + 1) + at(v, grid, c + 2)) / dx2;
  }
  VectorXd out(N);
  for (int n = 0; n < N; ++n) {
    const double Um = at(U, grid, n - 1), Up = at(U, grid, n + 1);
    const double conv = 3.0 / (4.0 * dx) * (Up * Up - Um * Um);
    const double cd = (Up - Um) / (2.0 * dx);
    const double lap = (Um - 2.0 * U[n] + Up) / dx2;
    const double aU = (Um + 2.0 * U[n] + Up) / 4.0;
    const double d3 =
        (at(v, grid, n + 2) - 3.0 * at(v, grid, n + 1) + 3.0 * v[n] - at(v, grid, n - 1)) / dx3;
    out[n] = conv - 3.0 * cd * lap + 0.5 * (at(p, grid, n - 1) + p[n]) - aU * d3;
  }
  return out;
}

inline VectorXd ch_residual(const ChStepContext& ctx, const VectorXd& u0, const VectorXd& u1) {
  const ExponentialWeights& w = ctx.w;
  const VectorXd P = ((u1 - u0) + w.em_plus * u1 - w.em_minus * u0) / ctx.dt;
  const VectorXd v = 0.5 * (w.w_plus * u1 + w.w_minus * u0);
  VectorXd r = ch_linear_part(P, ctx.grid) + ch_nonlinear_part(v, ctx.grid);
  if (ctx.baseline && ctx.gamma_half != 0.0) {
    r += ctx.gamma_half * ch_linear_part(v, ctx.grid);
  }
  return r;
}

/// d(nonlinear)/dv, assembled per cell; column range n-1 .. n+2.
inline void ch_nonlinear_jacobian(const VectorXd& v, const Grid1D& grid, double factor,
                                  std::vector<Eigen::Triplet<double>>& trip) {
  const int N = grid.n_nodes;
  const double dx = grid.dx();
  const double dx2 = dx * dx, dx3 = dx2 * dx;
  const VectorXd U = avg_forward(v, grid);

  auto qd = [&](int c) { return (at(U, grid, c + 1) - U[c]) / dx; };
  auto sv = [&](int c) {
    return (at(v, grid, c) - 2.0 * at(v, grid, c + 1) + at(v, grid, c + 2)) / dx2;
  };

  for (int n = 0; n < N; ++n) {
    std::map<int, double> row;  // dv-column -> value
    auto add_v = [&](int m, double val) { row[wrap_index(grid, m).index] += val; };
    auto add_U = [&](int c, double val) {
      add_v(c, 0.5 * val);
      add_v(c + 1, 0.5 * val);
    };

    const double Um = at(U, grid, n - 1), Up = at(U, grid, n + 1);
    const double cd = (Up - Um) / (2.0 * dx);
    const double lap = (Um - 2.0 * U[n] + Up) / dx2;
    const double aU = (Um + 2.0 * U[n] + Up) / 4.0;
    const double d3 =
        (at(v, grid, n + 2) - 3.0 * at(v, grid, n + 1) + 3.0 * v[n] - at(v, grid, n - 1)) / dx3;

    // conv = 3/(4dx) (U_{n+1}^2 - U_{n-1}^2)
    add_U(n + 1, 3.0 / (2.0 * dx) * Up);
    add_U(n - 1, -3.0 / (2.0 * dx) * Um);
    // -3 cd lap
    add_U(n - 1, -3.0 * (-lap / (2.0 * dx) + cd / dx2));
    add_U(n, 6.0 * cd / dx2);
    add_U(n + 1, -3.0 * (lap / (2.0 * dx) + cd / dx2));
    // +(p_{n-1} + p_n)/2 with p_c = qd_c * sv_c
    for (int c : {n - 1, n}) {
      const double q_c = qd(c), s_c = sv(c);
      add_U(c + 1, 0.5 * s_c / dx);
      add_U(c, -0.5 * s_c / dx);
      add_v(c, 0.5 * q_c / dx2);
      add_v(c + 1, -1.0 * q_c / dx2);
      add_v(c + 2, 0.5 * q_c / dx2);
    }
    // -aU * d3
    add_U(n - 1, -0.25 * d3);
    add_U(n, -0.5 * d3);
    add_U(n + 1, -0.25 * d3);
    add_v(n + 2, -aU / dx3);
    add_v(n + 1, 3.0 * aU / dx3);
    add_v(n, -3.0 * aU / dx3);
    add_v(n - 1, aU / dx3);

    for (const auto& [col, val] : row) trip.emplace_back(n, col, factor * val);
  }
}

inline void ch_linear_jacobian(const Grid1D& grid, double factor,
                               std::vector<Eigen::Triplet<double>>& trip) {
  const int N = grid.n_nodes;
  const double dx2 = grid.dx() * grid.dx();
  const double c_outer = 1.0 / 8.0 - 1.0 / (2.0 * dx2);
  const double c_inner = 3.0 / 8.0 + 1.0 / (2.0 * dx2);
  for (int n = 0; n < N; ++n) {
    trip.emplace_back(n, wrap_index(grid, n - 1).index, factor * c_outer);
    trip.emplace_back(n, n, factor * c_inner);
    trip.emplace_back(n, wrap_index(grid, n + 1).index, factor * c_inner);
    trip.emplace_back(n, wrap_index(grid, n + 2).index, factor * c_outer);
  }
}

inline SparseMatrix ch_jacobian(const ChStepContext& ctx, const VectorXd& u0, const VectorXd& u1) {
  const ExponentialWeights& w = ctx.w;
  const int N = ctx.grid.n_nodes;
  const VectorXd v = 0.5 * (w.w_plus * u1 + w.w_minus * u0);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(12) * N);
  double lin_factor = w.w_plus / ctx.dt;
  if (ctx.baseline && ctx.gamma_half != 0.0) lin_factor += ctx.gamma_half * 0.5 * w.w_plus;
  ch_linear_jacobian(ctx.grid, lin_factor, trip);
  ch_nonlinear_jacobian(v, ctx.grid, 0.5 * w.w_plus, trip);

  SparseMatrix J(N, N);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

inline CHField step_ch(const CHField& field, const DampingCoefficient& gamma, double dt,
                       const NewtonConfig& cfg, bool baseline, NewtonStats* stats) {
  const ChStepContext ctx = make_ch_context(gamma, field.grid, field.t, dt, baseline);

  ResidualFn residual = [&](const VectorXd& x) { return ch_residual(ctx, field.u, x); };
  SparseJacobianFn jacobian;
  if (cfg.jacobian == NewtonConfig::JacobianMode::analytic) {
    jacobian = [&](const VectorXd& x) { return ch_jacobian(ctx, field.u, x); };
  } else {
    jacobian = fd_jacobian(residual);
  }

  const VectorXd u1 = newton_solve(residual, jacobian, field.u, cfg, stats);
  CHField next;
  next.grid = field.grid;
  next.u = u1;
  next.t = field.t + dt;
  return next;
}

}  // namespace detail

/// Exponential box scheme applied directly to the damped Camassa-Holm
/// equation; preserves the e^theta-weighted Casimir sum exactly.
inline CHField step_ch_expbox(const CHField& field, const DampingCoefficient& gamma, double dt,
                              const NewtonConfig& cfg, NewtonStats* stats = nullptr) {
  return detail::step_ch(field, gamma, dt, cfg, false, stats);
}

/// Underlying Preissmann box scheme with the damping term at the half step.
inline CHField step_ch_preissmann(const CHField& field, const DampingCoefficient& gamma, double dt,
                                  const NewtonConfig& cfg, NewtonStats* stats = nullptr) {
  return detail::step_ch(field, gamma, dt, cfg, true, stats);
}

}  // namespace expms
