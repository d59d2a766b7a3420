#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "expms/damping.hpp"
#include "expms/grid.hpp"
#include "expms/newton.hpp"
#include "expms/system.hpp"

namespace expms {

/// Time-stepping schemes.  The two baselines are the a = 0 weight versions of
/// their exponential counterparts, with damping and forcing evaluated at the
/// half step and kept on the right-hand side.
enum class SchemeKind {
  embs,          ///< exponential mixed box (midpoint in time, symplectic Euler in space)
  expbox,        ///< exponential Preissmann box
  expdg,         ///< exponential discrete-gradient box
  midpoint_box,  ///< Preissmann box baseline
  mixed_euler,   ///< mixed Euler-box baseline
};

inline bool is_baseline(SchemeKind kind) {
  return kind == SchemeKind::midpoint_box || kind == SchemeKind::mixed_euler;
}

inline bool is_cell_scheme(SchemeKind kind) {
  return kind == SchemeKind::expbox || kind == SchemeKind::expdg ||
         kind == SchemeKind::midpoint_box;
}

inline std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::embs: return "embs";
    case SchemeKind::expbox: return "expbox";
    case SchemeKind::expdg: return "expdg";
    case SchemeKind::midpoint_box: return "midpoint_box";
    case SchemeKind::mixed_euler: return "mixed_euler";
  }
  return "unknown";
}

inline SchemeKind scheme_from_string(const std::string& name) {
  if (name == "embs") return SchemeKind::embs;
  if (name == "expbox") return SchemeKind::expbox;
  if (name == "expdg") return SchemeKind::expdg;
  if (name == "midpoint_box") return SchemeKind::midpoint_box;
  if (name == "mixed_euler") return SchemeKind::mixed_euler;
  throw ConfigurationError("unknown scheme '" + name + "'");
}

/// Splitting L = L_plus + L_minus with L_plus = -L_minus^T, realized as the
/// strict upper/lower triangular parts of a skew-symmetric L.
struct LSplit {
  MatrixXd L_plus;
  MatrixXd L_minus;
};

inline LSplit split_L(const MatrixXd& L) {
  require_skew(L, "split_L: L");
  LSplit s;
  s.L_plus = L.triangularView<Eigen::StrictlyUpper>();
  s.L_minus = L.triangularView<Eigen::StrictlyLower>();
  return s;
}

/// Gonzalez midpoint discrete gradient: satisfies the increment identity
/// g^T (z_hat - z) = S(z_hat) - S(z) and reduces to grad S at z_hat = z.
inline VectorXd discrete_gradient(const std::function<double(const VectorXd&, double)>& S,
                                  const std::function<VectorXd(const VectorXd&, double)>& grad_S,
                                  const VectorXd& z_hat, const VectorXd& z, double t) {
  const VectorXd m = 0.5 * (z_hat + z);
  const VectorXd d = z_hat - z;
  const double ndd = d.squaredNorm();
  const VectorXd g0 = grad_S(m, t);
  if (std::sqrt(ndd) < 1e-14 * (1.0 + z.norm())) return g0;
  const double c = (S(z_hat, t) - S(z, t) - g0.dot(d)) / ndd;
  return g0 + c * d;
}

namespace detail {

/// Discrete gradient together with its exact partial derivatives; these make
/// both the Newton iteration and the tangent propagation of the
/// discrete-gradient scheme exact linearizations.
inline void discrete_gradient_jacobians(const MultiSymplecticSystem& sys, const VectorXd& z_hat,
                                        const VectorXd& z, double t, VectorXd& g,
                                        MatrixXd& dg_dzhat, MatrixXd& dg_dz) {
  const VectorXd m = 0.5 * (z_hat + z);
  const VectorXd d = z_hat - z;
  const double ndd = d.squaredNorm();
  const VectorXd g0 = sys.grad_S(m, t);
  const MatrixXd H = sys.hess_S(m, t);
  if (std::sqrt(ndd) < 1e-14 * (1.0 + z.norm())) {
    g = g0;
    dg_dzhat = 0.5 * H;
    dg_dz = 0.5 * H;
    return;
  }
  const double c = (sys.S(z_hat, t) - sys.S(z, t) - g0.dot(d)) / ndd;
  const VectorXd Hd = 0.5 * (H * d);
  const VectorXd dc_dzhat = (sys.grad_S(z_hat, t) - Hd - g0) / ndd - (2.0 * c / ndd) * d;
  const VectorXd dc_dz = (-sys.grad_S(z, t) - Hd + g0) / ndd + (2.0 * c / ndd) * d;
  const MatrixXd I = MatrixXd::Identity(d.size(), d.size());
  g = g0 + c * d;
  dg_dzhat = 0.5 * H + c * I + d * dc_dzhat.transpose();
  dg_dz = 0.5 * H - c * I + d * dc_dz.transpose();
}

struct StepContext {
  const MultiSymplecticSystem* sys = nullptr;
  Grid1D grid;
  double t = 0.0;
  double dt = 0.0;
  double t_half = 0.0;
  SchemeKind kind = SchemeKind::expbox;
  ExponentialWeights w;
  double damping_half = 0.0;  ///< a(t_half); nonzero only for baselines
  LSplit lsplit;              ///< used by the node-centered (embs-family) stencil
};

inline StepContext make_context(const MultiSymplecticSystem& sys, const Grid1D& grid, double t,
                                double dt, SchemeKind kind) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (kind == SchemeKind::expdg && sys.has_forcing()) {
    throw ConfigurationError("the discrete-gradient scheme does not support external forcing");
  }
  StepContext ctx;
  ctx.sys = &sys;
  ctx.grid = grid;
  ctx.t = t;
  ctx.dt = dt;
  ctx.t_half = t + 0.5 * dt;
  ctx.kind = kind;
  ctx.w = is_baseline(kind) ? ExponentialWeights::identity(t, dt) : exp_weights(sys.damping, t, dt);
  ctx.damping_half = is_baseline(kind) ? sys.damping(ctx.t_half) : 0.0;
  if (kind == SchemeKind::embs || kind == SchemeKind::mixed_euler) ctx.lsplit = split_L(sys.L);
  return ctx;
}

/// Residual of the implicit step equations; one row per node (embs family)
/// or per cell (box family).
inline MatrixXd scheme_residual(const StepContext& ctx, const MatrixXd& Z0, const MatrixXd& Z1) {
  const MultiSymplecticSystem& sys = *ctx.sys;
  const Grid1D& grid = ctx.grid;
  const int N = grid.n_nodes;
  const double dx = grid.dx();
  const ExponentialWeights& w = ctx.w;

  // Spatial differences act on the raw arrays of each time level before the
  // exponential weights combine them; keeps the residual floor near roundoff.
  const MatrixXd D = ((Z1 - Z0) + w.em_plus * Z1 - w.em_minus * Z0) / ctx.dt;
  const MatrixXd A = 0.5 * (w.w_plus * Z1 + w.w_minus * Z0);

  MatrixXd R(N, sys.dim);
  if (is_cell_scheme(ctx.kind)) {
    const MatrixXd Dmid = avg_forward(D, grid);
    const MatrixXd dA =
        0.5 * (w.w_plus * diff_forward(Z1, grid) + w.w_minus * diff_forward(Z0, grid));
    const MatrixXd Amid = avg_forward(A, grid);
    for (int n = 0; n < N; ++n) {
      VectorXd r = sys.K * Dmid.row(n).transpose() + sys.L * dA.row(n).transpose();
      if (ctx.kind == SchemeKind::expdg) {
        const VectorXd a_right = row_at(A, grid, n + 1);
        r -= discrete_gradient(sys.S, sys.grad_S, a_right, A.row(n).transpose(), ctx.t_half);
      } else {
        r -= sys.grad_S(Amid.row(n).transpose(), ctx.t_half);
      }
      if (ctx.damping_half != 0.0) {
        r += ctx.damping_half * (sys.K * Amid.row(n).transpose());
      }
      if (sys.has_forcing()) {
        r -= sys.forcing(grid.node(n) + 0.5 * dx, ctx.t_half);
      }
      R.row(n) = r;
    }
  } else {
    const MatrixXd Adp =
        0.5 * (w.w_plus * diff_forward(Z1, grid) + w.w_minus * diff_forward(Z0, grid));
    const MatrixXd Adm =
        0.5 * (w.w_plus * diff_backward(Z1, grid) + w.w_minus * diff_backward(Z0, grid));
    for (int n = 0; n < N; ++n) {
      VectorXd r = sys.K * D.row(n).transpose() + ctx.lsplit.L_plus * Adp.row(n).transpose() +
                   ctx.lsplit.L_minus * Adm.row(n).transpose();
      r -= sys.grad_S(A.row(n).transpose(), ctx.t_half);
      if (ctx.damping_half != 0.0) {
        r += ctx.damping_half * (sys.K * A.row(n).transpose());
      }
      if (sys.has_forcing()) {
        r -= sys.forcing(grid.node(n), ctx.t_half);
      }
      R.row(n) = r;
    }
  }
  return R;
}

/// Jacobian of scheme_residual with respect to the new (wrt_new) or old time
/// level, exploiting the block-banded periodic structure.
inline SparseMatrix scheme_jacobian(const StepContext& ctx, const MatrixXd& Z0, const MatrixXd& Z1,
                                    bool wrt_new) {
  const MultiSymplecticSystem& sys = *ctx.sys;
  const Grid1D& grid = ctx.grid;
  const int N = grid.n_nodes;
  const int d = sys.dim;
  const double dx = grid.dx();
  const ExponentialWeights& w = ctx.w;
  const double cD = wrt_new ? w.w_plus / ctx.dt : -w.w_minus / ctx.dt;
  const double cA = wrt_new ? 0.5 * w.w_plus : 0.5 * w.w_minus;

  const MatrixXd A = 0.5 * (w.w_plus * Z1 + w.w_minus * Z0);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(N) * d * d * 3);
  auto add_block = [&](int row_node, int col_node, const MatrixXd& block) {
    const WrapResult wr = wrap_index(grid, col_node);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const double v = wr.sign * block(i, j);
        if (v != 0.0) trip.emplace_back(row_node * d + i, wr.index * d + j, v);
      }
    }
  };

  if (is_cell_scheme(ctx.kind)) {
    const MatrixXd Amid = avg_forward(A, grid);
    for (int n = 0; n < N; ++n) {
      MatrixXd G_self, G_right;  // gradient-term jacobians w.r.t. A_n and A_{n+1}
      if (ctx.kind == SchemeKind::expdg) {
        VectorXd g;
        MatrixXd dg_dzhat, dg_dz;
        discrete_gradient_jacobians(sys, row_at(A, grid, n + 1), A.row(n).transpose(), ctx.t_half,
                                    g, dg_dzhat, dg_dz);
        G_self = dg_dz;
        G_right = dg_dzhat;
      } else {
        const MatrixXd H = sys.hess_S(Amid.row(n).transpose(), ctx.t_half);
        G_self = 0.5 * H;
        G_right = 0.5 * H;
      }
      MatrixXd diag = sys.K * (0.5 * cD) - sys.L * (cA / dx) - G_self * cA;
      MatrixXd right = sys.K * (0.5 * cD) + sys.L * (cA / dx) - G_right * cA;
      if (ctx.damping_half != 0.0) {
        diag += ctx.damping_half * sys.K * (0.5 * cA);
        right += ctx.damping_half * sys.K * (0.5 * cA);
      }
      add_block(n, n, diag);
      add_block(n, n + 1, right);
    }
  } else {
    for (int n = 0; n < N; ++n) {
      const MatrixXd H = sys.hess_S(A.row(n).transpose(), ctx.t_half);
      MatrixXd diag = sys.K * cD - (ctx.lsplit.L_plus - ctx.lsplit.L_minus) * (cA / dx) - H * cA;
      if (ctx.damping_half != 0.0) diag += ctx.damping_half * sys.K * cA;
      add_block(n, n, diag);
      add_block(n, n + 1, ctx.lsplit.L_plus * (cA / dx));
      add_block(n, n - 1, -ctx.lsplit.L_minus * (cA / dx));
    }
  }
  SparseMatrix J(N * d, N * d);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

inline VectorXd flatten(const MatrixXd& V) {
  VectorXd x(V.size());
  for (Eigen::Index n = 0; n < V.rows(); ++n) {
    x.segment(n * V.cols(), V.cols()) = V.row(n);
  }
  return x;
}

inline MatrixXd unflatten(const VectorXd& x, Eigen::Index rows, Eigen::Index cols) {
  MatrixXd V(rows, cols);
  for (Eigen::Index n = 0; n < rows; ++n) {
    V.row(n) = x.segment(n * cols, cols);
  }
  return V;
}

}  // namespace detail

/// One implicit time step of the chosen scheme; Newton initial guess is the
/// previous level.
inline StateField step_scheme(const MultiSymplecticSystem& sys, const StateField& field, double dt,
                              SchemeKind kind, const NewtonConfig& cfg,
                              NewtonStats* stats = nullptr) {
  if (field.dim() != sys.dim) throw std::invalid_argument("step: field/system dimension mismatch");
  const detail::StepContext ctx = detail::make_context(sys, field.grid, field.t, dt, kind);
  const MatrixXd& Z0 = field.values;
  const Eigen::Index N = Z0.rows(), d = Z0.cols();

  ResidualFn residual = [&](const VectorXd& x) {
    return detail::flatten(detail::scheme_residual(ctx, Z0, detail::unflatten(x, N, d)));
  };
  SparseJacobianFn jacobian;
  if (cfg.jacobian == NewtonConfig::JacobianMode::analytic) {
    jacobian = [&](const VectorXd& x) {
      return detail::scheme_jacobian(ctx, Z0, detail::unflatten(x, N, d), true);
    };
  } else {
    jacobian = fd_jacobian(residual);
  }

  const VectorXd x = newton_solve(residual, jacobian, detail::flatten(Z0), cfg, stats);
  StateField next;
  next.grid = field.grid;
  next.values = detail::unflatten(x, N, d);
  next.t = field.t + dt;
  return next;
}

inline StateField step_embs(const MultiSymplecticSystem& sys, const StateField& field, double dt,
                            const NewtonConfig& cfg, NewtonStats* stats = nullptr) {
  return step_scheme(sys, field, dt, SchemeKind::embs, cfg, stats);
}

inline StateField step_expbox(const MultiSymplecticSystem& sys, const StateField& field, double dt,
                              const NewtonConfig& cfg, NewtonStats* stats = nullptr) {
  return step_scheme(sys, field, dt, SchemeKind::expbox, cfg, stats);
}

inline StateField step_expdg(const MultiSymplecticSystem& sys, const StateField& field, double dt,
                             const NewtonConfig& cfg, NewtonStats* stats = nullptr) {
  return step_scheme(sys, field, dt, SchemeKind::expdg, cfg, stats);
}

/// Exact linearization of one converged step: solves the discrete variational
/// equation about (prev, next) for the new-level perturbation.  This is a
/// single linear solve; forcing plays no role.
inline MatrixXd tangent_step(const MultiSymplecticSystem& sys, const StateField& prev,
                             const StateField& next, const MatrixXd& dz_prev, double dt,
                             SchemeKind kind) {
  if (dz_prev.rows() != prev.values.rows() || dz_prev.cols() != prev.values.cols()) {
    throw std::invalid_argument("tangent_step: perturbation shape mismatch");
  }
  detail::StepContext ctx = detail::make_context(sys, prev.grid, prev.t, dt, kind);
  const SparseMatrix J1 = detail::scheme_jacobian(ctx, prev.values, next.values, true);
  const SparseMatrix J0 = detail::scheme_jacobian(ctx, prev.values, next.values, false);
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(J1);
  if (lu.info() != Eigen::Success) {
    throw LinearSolveError("tangent_step: singular linearized system");
  }
  const VectorXd rhs = -(J0 * detail::flatten(dz_prev));
  const VectorXd sol = lu.solve(rhs);
  return detail::unflatten(sol, dz_prev.rows(), dz_prev.cols());
}

}  // namespace expms
