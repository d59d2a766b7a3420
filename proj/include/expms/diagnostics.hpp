#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "expms/ch.hpp"
#include "expms/grid.hpp"
#include "expms/nls.hpp"
#include "expms/schemes.hpp"
#include "expms/system.hpp"

namespace expms {

/// Per-step named residuals of the discrete conservation laws.
struct DiagnosticRecord {
  double t = 0.0;
  std::map<std::string, double> entries;
};

/// Fixed registry of diagnostic names; CSV columns follow this order.
inline const std::vector<std::string>& diagnostic_registry() {
  static const std::vector<std::string> names = {
      "norm_law_residual_max", "norm_law_residual_global", "paper_norm_error",
      "casimir_residual",      "casimir_unweighted_drift", "energy_residual",
      "energy_residual_etheta", "momentum_law_residual_max", "twoform_residual_max",
      "quadratic_law_residual_max", "kdv_mass_residual",    "newton_iterations"};
  return names;
}

/// Two independently propagated perturbation fields at consecutive levels.
struct TangentPair {
  MatrixXd du_prev, du_next;
  MatrixXd dv_prev, dv_next;
};

struct NormLawResult {
  double max_node_residual = 0.0;
  double global_residual = 0.0;
  double paper_norm_error = 0.0;
};

/// Discrete norm conservation law of the two-component NLS scheme:
///   d+t( e^{2 theta_i} (p^2 + q^2) ) + d+x( e^{2 theta_{i+1/2}} flux ) = 0,
///   flux_n = (2/dx)(Ap_{n-1} Aq_n - Ap_n Aq_{n-1}).
/// The global residual compares log(sum N^{i+1} / sum N^i) with -2 dtheta;
/// paper_norm_error is the same log ratio minus 4 dtheta, emitted for the
/// figure reproduction only.
inline NormLawResult norm_law_residual(const ComplexField& prev, const ComplexField& next,
                                       const DampingCoefficient& beta, double dt) {
  const Grid1D& grid = prev.grid;
  const int N = grid.n_nodes;
  const double dx = grid.dx();
  const ExponentialWeights w = exp_weights(beta, prev.t, dt);
  const double th0 = theta(beta, prev.t);
  const double thh = theta(beta, prev.t + 0.5 * dt);
  const double th1 = theta(beta, prev.t + dt);

  const VectorXd Ap = 0.5 * (w.w_plus * next.p + w.w_minus * prev.p);
  const VectorXd Aq = 0.5 * (w.w_plus * next.q + w.w_minus * prev.q);

  VectorXd flux(N);
  for (int n = 0; n < N; ++n) {
    flux[n] = 2.0 / dx * (at(Ap, grid, n - 1) * Aq[n] - Ap[n] * at(Aq, grid, n - 1));
  }
  const double e0 = std::exp(2.0 * th0), e1 = std::exp(2.0 * th1), eh = std::exp(2.0 * thh);
  double worst = 0.0;
  for (int n = 0; n < N; ++n) {
    const double n0 = prev.p[n] * prev.p[n] + prev.q[n] * prev.q[n];
    const double n1 = next.p[n] * next.p[n] + next.q[n] * next.q[n];
    const double r =
        (e1 * n1 - e0 * n0) / dt + eh * (at(flux, grid, n + 1) - flux[n]) / dx;
    worst = std::max(worst, std::abs(r));
  }

  const double sum0 = prev.p.squaredNorm() + prev.q.squaredNorm();
  const double sum1 = next.p.squaredNorm() + next.q.squaredNorm();
  NormLawResult out;
  out.max_node_residual = worst;
  out.global_residual = std::abs(std::log(sum1 / sum0) + 2.0 * (th1 - th0));
  out.paper_norm_error = std::log(sum1 / sum0) - 4.0 * (th1 - th0);
  return out;
}

/// Discrete version of the quadratic-invariant law for the exponential box
/// scheme (forcing-free): densities at cell midpoints, flux from the
/// time-averaged levels.
inline double quadratic_law_residual(const StateField& prev, const StateField& next,
                                     const MultiSymplecticSystem& sys,
                                     const QuadraticInvariantAction& action, double dt) {
  if (!action.verified) {
    throw ConfigurationError("quadratic_law_residual: the action must be verified");
  }
  if (sys.has_forcing()) {
    throw ConfigurationError("quadratic_law_residual: requires a forcing-free system");
  }
  const Grid1D& grid = prev.grid;
  const int N = grid.n_nodes;
  const double dx = grid.dx();
  const ExponentialWeights w = exp_weights(sys.damping, prev.t, dt);
  const double th0 = theta(sys.damping, prev.t);
  const double thh = theta(sys.damping, prev.t + 0.5 * dt);
  const double th1 = theta(sys.damping, prev.t + dt);

  const MatrixXd KB = sys.K * action.B;
  const MatrixXd LB = sys.L * action.B;
  const MatrixXd A = 0.5 * (w.w_plus * next.values + w.w_minus * prev.values);
  const MatrixXd mid0 = avg_forward(prev.values, grid);
  const MatrixXd mid1 = avg_forward(next.values, grid);

  VectorXd flux(N);
  for (int n = 0; n < N; ++n) {
    const VectorXd an = A.row(n).transpose();
    flux[n] = an.dot(LB * an);
  }
  const double e0 = std::exp(2.0 * th0), e1 = std::exp(2.0 * th1), eh = std::exp(2.0 * thh);
  double worst = 0.0;
  for (int n = 0; n < N; ++n) {
    const VectorXd m0 = mid0.row(n).transpose();
    const VectorXd m1 = mid1.row(n).transpose();
    const double r = (e1 * m1.dot(KB * m1) - e0 * m0.dot(KB * m0)) / dt +
                     eh * (at(flux, grid, n + 1) - flux[n]) / dx;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

/// Discrete conformal momentum law of the discrete-gradient scheme:
/// density 1/2 z_{n+1/2}^T K d+x z_n per cell, flux
/// 1/2 (D z_n)^T K (A z_n) + S(A z_n, t_{i+1/2}) per node.
inline double momentum_law_residual(const StateField& prev, const StateField& next,
                                    const MultiSymplecticSystem& sys, double dt) {
  if (sys.has_forcing()) {
    throw ConfigurationError("momentum_law_residual: requires a forcing-free system");
  }
  const Grid1D& grid = prev.grid;
  const int N = grid.n_nodes;
  const double dx = grid.dx();
  const double t_half = prev.t + 0.5 * dt;
  const ExponentialWeights w = exp_weights(sys.damping, prev.t, dt);
  const double th0 = theta(sys.damping, prev.t);
  const double thh = theta(sys.damping, t_half);
  const double th1 = theta(sys.damping, prev.t + dt);

  const MatrixXd A = 0.5 * (w.w_plus * next.values + w.w_minus * prev.values);
  const MatrixXd D =
      ((next.values - prev.values) + w.em_plus * next.values - w.em_minus * prev.values) / dt;

  auto cell_density = [&](const MatrixXd& Z) {
    VectorXd rho(N);
    const MatrixXd mid = avg_forward(Z, grid);
    const MatrixXd dz = diff_forward(Z, grid);
    for (int n = 0; n < N; ++n) {
      rho[n] = 0.5 * mid.row(n).dot((sys.K * dz.row(n).transpose()));
    }
    return rho;
  };
  const VectorXd rho0 = cell_density(prev.values);
  const VectorXd rho1 = cell_density(next.values);

  VectorXd flux(N);
  for (int n = 0; n < N; ++n) {
    const VectorXd an = A.row(n).transpose();
    flux[n] = 0.5 * D.row(n).dot(sys.K * an) + sys.S(an, t_half);
  }

  const double e0 = std::exp(2.0 * th0), e1 = std::exp(2.0 * th1), eh = std::exp(2.0 * thh);
  double worst = 0.0;
  for (int n = 0; n < N; ++n) {
    const double r = (e1 * rho1[n] - e0 * rho0[n]) / dt +
                     eh * (at(flux, grid, n + 1) - flux[n]) / dx;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

/// Discrete multi-conformal-symplectic law evaluated on a tangent pair.
/// The wedge dz ^ M dz is realized as du^T M dv - dv^T M du.  Baseline kinds
/// are measured with the conformal formula of their exponential counterpart,
/// which is exactly the defect the comparison experiments record.
inline double twoform_residual(const StateField& prev, const StateField& next,
                               const TangentPair& pair, const MultiSymplecticSystem& sys,
                               SchemeKind kind, double dt) {
  if (kind == SchemeKind::expdg) {
    throw ConfigurationError("twoform_residual: unsupported scheme kind");
  }
  const Grid1D& grid = prev.grid;
  const int N = grid.n_nodes;
  const double dx = grid.dx();
  const ExponentialWeights w = exp_weights(sys.damping, prev.t, dt);
  const double th0 = theta(sys.damping, prev.t);
  const double thh = theta(sys.damping, prev.t + 0.5 * dt);
  const double th1 = theta(sys.damping, prev.t + dt);

  const MatrixXd AU = 0.5 * (w.w_plus * pair.du_next + w.w_minus * pair.du_prev);
  const MatrixXd AV = 0.5 * (w.w_plus * pair.dv_next + w.w_minus * pair.dv_prev);

  const double e0 = std::exp(2.0 * th0), e1 = std::exp(2.0 * th1), eh = std::exp(2.0 * thh);
  double worst = 0.0;
  if (kind == SchemeKind::expbox || kind == SchemeKind::midpoint_box) {
    auto wedge = [&](const VectorXd& a, const VectorXd& b, const MatrixXd& M) {
      return a.dot(M * b) - b.dot(M * a);
    };
    const MatrixXd u_mid0 = avg_forward(pair.du_prev, grid);
    const MatrixXd v_mid0 = avg_forward(pair.dv_prev, grid);
    const MatrixXd u_mid1 = avg_forward(pair.du_next, grid);
    const MatrixXd v_mid1 = avg_forward(pair.dv_next, grid);
    VectorXd kappa(N);
    for (int n = 0; n < N; ++n) {
      kappa[n] = wedge(AU.row(n).transpose(), AV.row(n).transpose(), sys.L);
    }
    for (int n = 0; n < N; ++n) {
      const double om0 = wedge(u_mid0.row(n).transpose(), v_mid0.row(n).transpose(), sys.K);
      const double om1 = wedge(u_mid1.row(n).transpose(), v_mid1.row(n).transpose(), sys.K);
      const double r = (e1 * om1 - e0 * om0) / dt + eh * (at(kappa, grid, n + 1) - kappa[n]) / dx;
      worst = std::max(worst, std::abs(r));
    }
  } else {  // embs / mixed_euler
    const LSplit split = split_L(sys.L);
    VectorXd kappa(N);
    for (int n = 0; n < N; ++n) {
      const VectorXd au_m = row_at(AU, grid, n - 1);
      const VectorXd av_m = row_at(AV, grid, n - 1);
      kappa[n] = au_m.dot(split.L_plus * AV.row(n).transpose()) -
                 av_m.dot(split.L_plus * AU.row(n).transpose());
    }
    for (int n = 0; n < N; ++n) {
      const double om0 = pair.du_prev.row(n).dot(sys.K * pair.dv_prev.row(n).transpose());
      const double om1 = pair.du_next.row(n).dot(sys.K * pair.dv_next.row(n).transpose());
      const double r = (e1 * om1 - e0 * om0) / dt + eh * (at(kappa, grid, n + 1) - kappa[n]) / dx;
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

struct ChLawResult {
  double casimir_residual = 0.0;
  double energy_residual = 0.0;         ///< e^{2 theta}-weighted H1 density increment
  double energy_residual_etheta = 0.0;  ///< e^theta-weighted variant, recorded as printed
  double unweighted_casimir_drift = 0.0;
};

/// Weighted Casimir and discrete H1 energy increments of one Camassa-Holm
/// step.  The Casimir e^theta sum u dx is exact for the exponential scheme;
/// the energy residuals are recorded for the scheme comparison.
inline ChLawResult ch_casimir_and_energy(const CHField& prev, const CHField& next,
                                         const DampingCoefficient& gamma, double dt) {
  if (prev.grid.boundary != Boundary::periodic) {
    throw ConfigurationError("ch_casimir_and_energy: periodic boundary required");
  }
  const double dx = prev.grid.dx();
  const double th0 = theta(gamma, prev.t);
  const double th1 = theta(gamma, prev.t + dt);

  auto h1_energy = [&](const CHField& f) {
    const VectorXd du = diff_forward(f.u, f.grid);
    return 0.5 * (f.u.squaredNorm() + du.squaredNorm()) * dx;
  };
  const double sum0 = prev.u.sum() * dx;
  const double sum1 = next.u.sum() * dx;
  const double E0 = h1_energy(prev);
  const double E1 = h1_energy(next);

  ChLawResult out;
  out.casimir_residual = std::abs(std::exp(th1) * sum1 - std::exp(th0) * sum0);
  out.energy_residual = std::abs(std::exp(2.0 * th1) * E1 - std::exp(2.0 * th0) * E0);
  out.energy_residual_etheta = std::abs(std::exp(th1) * E1 - std::exp(th0) * E0);
  out.unweighted_casimir_drift = std::abs(sum1 - sum0);
  return out;
}

/// e^theta-weighted global mass balance of the KdV component u = z[1].
inline double kdv_mass_residual(const StateField& prev, const StateField& next,
                                const MultiSymplecticSystem& sys, double dt) {
  const double dx = prev.grid.dx();
  const double th0 = theta(sys.damping, prev.t);
  const double th1 = theta(sys.damping, prev.t + dt);
  const double sum0 = prev.values.col(1).sum() * dx;
  const double sum1 = next.values.col(1).sum() * dx;
  return std::exp(th1) * sum1 - std::exp(th0) * sum0;
}

}  // namespace expms
