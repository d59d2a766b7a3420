#pragma once

#include <cmath>

#include "expms/damping.hpp"
#include "expms/grid.hpp"
#include "expms/models.hpp"
#include "expms/newton.hpp"

namespace expms {

/// psi = p + i q on a 1-D grid.
struct ComplexField {
  Grid1D grid;
  VectorXd p;
  VectorXd q;
  double t = 0.0;
};

/// Parameters of the damped-driven NLS experiments:
/// beta(t) = gamma + c sin(omega t), alpha(t) = c cos(omega t).
struct NlsParams {
  NlsNonlinearity nonlinearity = NlsNonlinearity::cubic();
  double gamma = 0.0;
  double c = 0.0;
  double omega = 0.0;

  DampingCoefficient beta() const { return DampingCoefficient::sinusoid(gamma, c, omega); }
  double alpha(double t) const { return c * std::cos(omega * t); }
};

namespace detail {

struct NlsStepContext {
  NlsParams params;
  Grid1D grid;
  double t = 0.0, dt = 0.0, t_half = 0.0;
  ExponentialWeights w;
  bool baseline = false;
  double beta_half = 0.0;  ///< kept on the right-hand side by the baseline
};

inline NlsStepContext make_nls_context(const NlsParams& params, const Grid1D& grid, double t,
                                       double dt, bool baseline) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_nls: dt must be positive");
  NlsStepContext ctx;
  ctx.params = params;
  ctx.grid = grid;
  ctx.t = t;
  ctx.dt = dt;
  ctx.t_half = t + 0.5 * dt;
  ctx.baseline = baseline;
  ctx.w = baseline ? ExponentialWeights::identity(t, dt) : exp_weights(params.beta(), t, dt);
  ctx.beta_half = baseline ? params.beta()(ctx.t_half) : 0.0;
  return ctx;
}

/// Residual of the two-component scheme, unknowns x = [P1; Q1]:
///   D q - A d2x p - V'((A p)^2 + (A q)^2) A p - alpha(t_1/2) A p = 0
///   D p + A d2x q + V'((A p)^2 + (A q)^2) A q + alpha(t_1/2) A q = 0
inline VectorXd nls_residual(const NlsStepContext& ctx, const VectorXd& P0, const VectorXd& Q0,
                             const VectorXd& P1, const VectorXd& Q1) {
  const ExponentialWeights& w = ctx.w;
  const Grid1D& grid = ctx.grid;
  const int N = grid.n_nodes;

  const VectorXd Dp = ((P1 - P0) + w.em_plus * P1 - w.em_minus * P0) / ctx.dt;
  const VectorXd Dq = ((Q1 - Q0) + w.em_plus * Q1 - w.em_minus * Q0) / ctx.dt;
  const VectorXd Ap = 0.5 * (w.w_plus * P1 + w.w_minus * P0);
  const VectorXd Aq = 0.5 * (w.w_plus * Q1 + w.w_minus * Q0);
  const VectorXd Alap_p =
      0.5 * (w.w_plus * diff_second(P1, grid) + w.w_minus * diff_second(P0, grid));
  const VectorXd Alap_q =
      0.5 * (w.w_plus * diff_second(Q1, grid) + w.w_minus * diff_second(Q0, grid));

  const double a = ctx.params.alpha(ctx.t_half);
  VectorXd r(2 * N);
  for (int n = 0; n < N; ++n) {
    const double rho = Ap[n] * Ap[n] + Aq[n] * Aq[n];
    const double vp = ctx.params.nonlinearity.V_prime(rho) + a;
    r[n] = Dq[n] - Alap_p[n] - vp * Ap[n];
    r[N + n] = Dp[n] + Alap_q[n] + vp * Aq[n];
    if (ctx.baseline) {
      r[n] += ctx.beta_half * Aq[n];
      r[N + n] += ctx.beta_half * Ap[n];
    }
  }
  return r;
}

inline SparseMatrix nls_jacobian(const NlsStepContext& ctx, const VectorXd& P0, const VectorXd& Q0,
                                 const VectorXd& P1, const VectorXd& Q1) {
  const ExponentialWeights& w = ctx.w;
  const Grid1D& grid = ctx.grid;
  const int N = grid.n_nodes;
  const double dx2 = grid.dx() * grid.dx();
  const double cD = w.w_plus / ctx.dt;
  const double cA = 0.5 * w.w_plus;

  const VectorXd Ap = 0.5 * (w.w_plus * P1 + w.w_minus * P0);
  const VectorXd Aq = 0.5 * (w.w_plus * Q1 + w.w_minus * Q0);
  const double a = ctx.params.alpha(ctx.t_half);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(10) * N);
  auto lap_row = [&](int row, int node, int col_base, double factor) {
    for (int off : {-1, 0, 1}) {
      const WrapResult wr = wrap_index(grid, node + off);
      const double stencil = (off == 0) ? -2.0 / dx2 : 1.0 / dx2;
      trip.emplace_back(row, col_base + wr.index, wr.sign * factor * stencil);
    }
  };

  for (int n = 0; n < N; ++n) {
    const double rho = Ap[n] * Ap[n] + Aq[n] * Aq[n];
    const double vp = ctx.params.nonlinearity.V_prime(rho) + a;
    const double vpp = ctx.params.nonlinearity.V_second(rho);
    // r1 = Dq - A lap p - vp * Ap
    trip.emplace_back(n, N + n, cD);
    lap_row(n, n, 0, -cA);
    trip.emplace_back(n, n, -(vp + 2.0 * Ap[n] * Ap[n] * vpp) * cA);
    trip.emplace_back(n, N + n, -2.0 * Ap[n] * Aq[n] * vpp * cA);
    // r2 = Dp + A lap q + vp * Aq
    trip.emplace_back(N + n, n, cD);
    lap_row(N + n, n, N, cA);
    trip.emplace_back(N + n, N + n, (vp + 2.0 * Aq[n] * Aq[n] * vpp) * cA);
    trip.emplace_back(N + n, n, 2.0 * Ap[n] * Aq[n] * vpp * cA);
    if (ctx.baseline) {
      trip.emplace_back(n, N + n, ctx.beta_half * cA);
      trip.emplace_back(N + n, n, ctx.beta_half * cA);
    }
  }
  SparseMatrix J(2 * N, 2 * N);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

inline ComplexField step_nls(const ComplexField& field, const NlsParams& params, double dt,
                             const NewtonConfig& cfg, bool baseline, NewtonStats* stats) {
  const detail::NlsStepContext ctx =
      detail::make_nls_context(params, field.grid, field.t, dt, baseline);
  const int N = field.grid.n_nodes;

  ResidualFn residual = [&](const VectorXd& x) {
    return nls_residual(ctx, field.p, field.q, x.head(N), x.tail(N));
  };
  SparseJacobianFn jacobian;
  if (cfg.jacobian == NewtonConfig::JacobianMode::analytic) {
    jacobian = [&](const VectorXd& x) {
      return nls_jacobian(ctx, field.p, field.q, x.head(N), x.tail(N));
    };
  } else {
    jacobian = fd_jacobian(residual);
  }

  VectorXd guess(2 * N);
  guess << field.p, field.q;
  const VectorXd x = newton_solve(residual, jacobian, guess, cfg, stats);
  ComplexField next;
  next.grid = field.grid;
  next.p = x.head(N);
  next.q = x.tail(N);
  next.t = field.t + dt;
  return next;
}

}  // namespace detail

/// Exponential two-component scheme for the damped-driven NLS equation.
inline ComplexField step_nls_embs(const ComplexField& field, const NlsParams& params, double dt,
                                  const NewtonConfig& cfg, NewtonStats* stats = nullptr) {
  return detail::step_nls(field, params, dt, cfg, false, stats);
}

/// Underlying method: implicit midpoint in time with the damping/driving
/// terms evaluated at the half step.
inline ComplexField step_nls_midpoint(const ComplexField& field, const NlsParams& params,
                                      double dt, const NewtonConfig& cfg,
                                      NewtonStats* stats = nullptr) {
  return detail::step_nls(field, params, dt, cfg, true, stats);
}

}  // namespace expms
