#include <cmath>

#include <gtest/gtest.h>

#include "expms/newton.hpp"

using namespace expms;

namespace {

SparseMatrix scalar_matrix(double v) {
  SparseMatrix m(1, 1);
  m.insert(0, 0) = v;
  return m;
}

}  // namespace

TEST(Newton, LinearProblemConvergesInOneIteration) {
  const double c = 3.7;
  ResidualFn residual = [c](const VectorXd& x) { return (x.array() - c).matrix().eval(); };
  SparseJacobianFn jacobian = [](const VectorXd&) { return scalar_matrix(1.0); };
  NewtonStats stats;
  const VectorXd x = newton_solve(residual, jacobian, VectorXd::Zero(1), {}, &stats);
  EXPECT_NEAR(x[0], c, 1e-14);
  EXPECT_EQ(stats.iterations, 1);
}

TEST(Newton, CubeRoot) {
  ResidualFn residual = [](const VectorXd& x) {
    VectorXd r(1);
    r[0] = x[0] * x[0] * x[0] - 8.0;
    return r;
  };
  SparseJacobianFn jacobian = [](const VectorXd& x) {
    return scalar_matrix(3.0 * x[0] * x[0]);
  };
  VectorXd guess(1);
  guess[0] = 3.0;
  const VectorXd x = newton_solve(residual, jacobian, guess, {});
  EXPECT_NEAR(x[0], 2.0, 1e-12);
}

TEST(Newton, NoRootRaisesNonConvergence) {
  // x^2 + 1 has no real root; the residual is bounded below by 1.
  ResidualFn residual = [](const VectorXd& x) {
    VectorXd r(1);
    r[0] = x[0] * x[0] + 1.0;
    return r;
  };
  SparseJacobianFn jacobian = [](const VectorXd& x) {
    return scalar_matrix(std::max(2.0 * x[0], 1e-3));
  };
  VectorXd guess(1);
  guess[0] = 1.0;
  NewtonConfig cfg;
  cfg.max_iter = 20;
  try {
    newton_solve(residual, jacobian, guess, cfg);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_GE(e.best_residual, 1.0);
    EXPECT_EQ(e.iterations, 20);
  }
}

TEST(Newton, SingularJacobianRaisesLinearSolveError) {
  ResidualFn residual = [](const VectorXd& x) { return x; };
  SparseJacobianFn jacobian = [](const VectorXd&) { return SparseMatrix(1, 1); };
  VectorXd guess(1);
  guess[0] = 1.0;
  EXPECT_THROW(newton_solve(residual, jacobian, guess, {}), LinearSolveError);
}

TEST(Newton, FiniteDifferenceJacobianAgreesWithAnalytic) {
  ResidualFn residual = [](const VectorXd& x) {
    VectorXd r(2);
    r[0] = x[0] * x[0] + x[1] - 2.0;
    r[1] = std::sin(x[0]) - 0.3 * x[1];
    return r;
  };
  VectorXd x(2);
  x << 0.4, -0.8;
  const SparseMatrix J = fd_jacobian(residual)(x);
  EXPECT_NEAR(J.coeff(0, 0), 2.0 * x[0], 1e-5);
  EXPECT_NEAR(J.coeff(0, 1), 1.0, 1e-6);
  EXPECT_NEAR(J.coeff(1, 0), std::cos(x[0]), 1e-5);
  EXPECT_NEAR(J.coeff(1, 1), -0.3, 1e-6);
}

TEST(Newton, DampedStepsRecoverFromOvershoot) {
  // steep residual where full steps overshoot: atan has a bounded basin
  ResidualFn residual = [](const VectorXd& x) {
    VectorXd r(1);
    r[0] = std::atan(x[0]);
    return r;
  };
  SparseJacobianFn jacobian = [](const VectorXd& x) {
    return scalar_matrix(1.0 / (1.0 + x[0] * x[0]));
  };
  VectorXd guess(1);
  guess[0] = 3.0;  // plain Newton diverges from here
  const VectorXd x = newton_solve(residual, jacobian, guess, {});
  EXPECT_NEAR(x[0], 0.0, 1e-12);
}
