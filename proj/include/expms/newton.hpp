#pragma once

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "expms/errors.hpp"

namespace expms {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct NewtonConfig {
  enum class JacobianMode { analytic, finite_difference };

  double tol = 1e-12;  ///< residual infinity-norm target
  int max_iter = 50;
  JacobianMode jacobian = JacobianMode::analytic;
};

struct NewtonStats {
  int iterations = 0;
  double final_residual = 0.0;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, VectorXd best, double residual, int iterations)
      : std::runtime_error(what),
        best_iterate(std::move(best)),
        best_residual(residual),
        iterations(iterations) {}

  VectorXd best_iterate;
  double best_residual;
  int iterations;
};

using ResidualFn = std::function<VectorXd(const VectorXd&)>;
using SparseJacobianFn = std::function<SparseMatrix(const VectorXd&)>;

/// Forward-difference Jacobian of a residual map; intended for tests and
/// small problems (cost scales with the number of unknowns).
inline SparseJacobianFn fd_jacobian(ResidualFn residual, double eps = 1e-7) {
  return [residual, eps](const VectorXd& x) {
    const VectorXd f0 = residual(x);
    Eigen::MatrixXd dense(f0.size(), x.size());
    VectorXd xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double save = xp[j];
      xp[j] += eps;
      dense.col(j) = (residual(xp) - f0) / eps;
      xp[j] = save;
    }
    return SparseMatrix(dense.sparseView());
  };
}

/// Damped Newton iteration: full steps with halving (up to 30 times) whenever
/// the residual norm would increase.  Returns the first iterate whose
/// residual infinity-norm is at or below cfg.tol.
inline VectorXd newton_solve(const ResidualFn& residual, const SparseJacobianFn& jacobian,
                             VectorXd guess, const NewtonConfig& cfg,
                             NewtonStats* stats = nullptr) {
  if (cfg.max_iter < 1) throw std::invalid_argument("newton_solve: max_iter must be >= 1");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("newton_solve: tol must be positive");

  VectorXd x = std::move(guess);
  VectorXd r = residual(x);
  double rn = r.lpNorm<Eigen::Infinity>();
  VectorXd best_x = x;
  double best_rn = rn;

  Eigen::SparseLU<SparseMatrix> lu;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    if (rn <= cfg.tol) {
      if (stats) *stats = {iter, rn};
      return x;
    }
    const SparseMatrix J = jacobian(x);
    lu.compute(J);
    if (lu.info() != Eigen::Success) {
      throw LinearSolveError("newton_solve: singular Jacobian at iteration " +
                             std::to_string(iter));
    }
    const VectorXd dx = lu.solve(-r);

    double lambda = 1.0;
    VectorXd x_trial, r_trial;
    double rn_trial = std::numeric_limits<double>::infinity();
    for (int halving = 0; halving <= 30; ++halving) {
      x_trial = x + lambda * dx;
      r_trial = residual(x_trial);
      rn_trial = r_trial.lpNorm<Eigen::Infinity>();
      if (std::isfinite(rn_trial) && (rn_trial < rn || rn_trial <= cfg.tol)) break;
      lambda *= 0.5;
    }
    x = x_trial;
    r = r_trial;
    rn = rn_trial;
    if (rn < best_rn) {
      best_rn = rn;
      best_x = x;
    }
  }
  if (rn <= cfg.tol) {
    if (stats) *stats = {cfg.max_iter, rn};
    return x;
  }
  throw NonConvergenceError(
      "newton_solve: no convergence after " + std::to_string(cfg.max_iter) +
          " iterations (best residual " + std::to_string(best_rn) + ")",
      best_x, best_rn, cfg.max_iter);
}

}  // namespace expms
