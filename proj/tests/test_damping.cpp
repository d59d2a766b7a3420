#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "expms/damping.hpp"

using namespace expms;

TEST(Theta, ZeroCoefficient) {
  const auto a = DampingCoefficient::zero();
  EXPECT_DOUBLE_EQ(theta(a, 7.3), 0.0);
  EXPECT_DOUBLE_EQ(theta(a, 0.0), 0.0);
}

TEST(Theta, SinusoidMatchesClosedForm) {
  const double gamma = 0.1, c = -0.2, omega = M_PI;
  const auto a = DampingCoefficient::sinusoid(gamma, c, omega);
  for (double t : {0.0, 0.37, 1.0, 2.6}) {
    const double expected = gamma * t + c / omega * (1.0 - std::cos(omega * t));
    EXPECT_NEAR(theta(a, t), expected, 1e-15);
  }
  EXPECT_DOUBLE_EQ(theta(a, 0.0), 0.0);
}

TEST(Theta, QuadratureFallbackMatchesAnalytic) {
  // a(t) = 0.1 - 0.2 sin(pi t); theta(1) = 0.1 - 0.4/pi analytically.
  DampingCoefficient a;
  a.rate = [](double t) { return 0.1 - 0.2 * std::sin(M_PI * t); };
  ASSERT_FALSE(a.has_antiderivative());
  EXPECT_NEAR(theta(a, 1.0), 0.1 - 0.4 / M_PI, 1e-12);
}

TEST(Theta, QuadratureAgreesWithExactAntiderivative) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double gamma = unif(rng), c = unif(rng), omega = 1.0 + 3.0 * std::abs(unif(rng));
    const auto exact = DampingCoefficient::sinusoid(gamma, c, omega);
    DampingCoefficient quad;
    quad.rate = exact.rate;
    const double t0 = 2.0 * unif(rng), t1 = t0 + 2.0 * std::abs(unif(rng));
    const double dth_exact = theta(exact, t1) - theta(exact, t0);
    const double dth_quad = integrate_rate(quad, t0, t1);
    EXPECT_LE(std::abs(dth_exact - dth_quad), 1e-10 * (1.0 + std::abs(dth_exact)));
  }
}

TEST(Theta, NonFiniteRateReportsTime) {
  DampingCoefficient a;
  a.rate = [](double t) { return t > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0; };
  try {
    theta(a, 1.0);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_NE(std::string(e.what()).find("t = "), std::string::npos);
  }
}

TEST(ExpWeights, ZeroCoefficientIsIdentity) {
  const auto w = exp_weights(DampingCoefficient::zero(), 0.3, 0.01);
  EXPECT_DOUBLE_EQ(w.w_plus, 1.0);
  EXPECT_DOUBLE_EQ(w.w_minus, 1.0);
  EXPECT_DOUBLE_EQ(w.em_plus, 0.0);
  EXPECT_DOUBLE_EQ(w.em_minus, 0.0);
}

TEST(ExpWeights, ConstantCoefficient) {
  const auto w = exp_weights(DampingCoefficient::constant(0.1), 0.0, 0.001);
  EXPECT_NEAR(w.w_plus, std::exp(5e-5), 1e-18);
  EXPECT_NEAR(w.w_minus, std::exp(-5e-5), 1e-18);
  EXPECT_GT(w.w_plus, 0.0);
  EXPECT_GT(w.w_minus, 0.0);
}

TEST(ExpWeights, HalfIntervalThetaForm) {
  const auto a = DampingCoefficient::sinusoid(0.1, -0.2, M_PI);
  for (double t : {0.0, 0.21, 1.7}) {
    for (double dt : {1e-3, 0.05, 0.4}) {
      const auto w = exp_weights(a, t, dt);
      const double th0 = theta(a, t), thh = theta(a, t + 0.5 * dt), th1 = theta(a, t + dt);
      EXPECT_NEAR(w.w_plus, std::exp(th1 - thh), 1e-12);
      EXPECT_NEAR(w.w_minus, std::exp(th0 - thh), 1e-12);
    }
  }
}

TEST(ExpWeights, QuadratureMatchesExact) {
  const auto exact = DampingCoefficient::sinusoid(0.1, -0.2, M_PI);
  DampingCoefficient quad;
  quad.rate = exact.rate;
  const auto we = exp_weights(exact, 0.0, 0.001);
  const auto wq = exp_weights(quad, 0.0, 0.001);
  EXPECT_NEAR(we.w_plus, wq.w_plus, 1e-12);
  EXPECT_NEAR(we.w_minus, wq.w_minus, 1e-12);
}

TEST(ExpWeights, NonPositiveDtRejected) {
  EXPECT_THROW(exp_weights(DampingCoefficient::zero(), 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(exp_weights(DampingCoefficient::zero(), 0.0, -0.1), std::invalid_argument);
}

TEST(Operators, AveragingReducesToMean) {
  const auto w = exp_weights(DampingCoefficient::zero(), 0.0, 0.1);
  VectorXd z0(3), z1(3);
  z0 << 1, 2, 3;
  z1 << 5, 6, 7;
  const VectorXd avg = op_A(w, z0, z1);
  EXPECT_DOUBLE_EQ(avg[0], 3.0);
  EXPECT_DOUBLE_EQ(avg[1], 4.0);
  EXPECT_DOUBLE_EQ(avg[2], 5.0);
  EXPECT_DOUBLE_EQ(op_A(w, VectorXd::Zero(2), VectorXd::Zero(2)).norm(), 0.0);
}

TEST(Operators, AveragingConstantCoefficient) {
  const auto w = exp_weights(DampingCoefficient::constant(0.1), 0.0, 0.001);
  VectorXd one = VectorXd::Ones(1);
  EXPECT_NEAR(op_A(w, one, one)[0], std::cosh(5e-5), 1e-16);
}

TEST(Operators, DifferenceReducesToForwardDifference) {
  const auto w = exp_weights(DampingCoefficient::zero(), 0.0, 0.25);
  VectorXd z0(2), z1(2);
  z0 << 1, -2;
  z1 << 2, 4;
  const VectorXd d = op_D(w, z0, z1);
  EXPECT_DOUBLE_EQ(d[0], 4.0);
  EXPECT_DOUBLE_EQ(d[1], 24.0);
}

TEST(Operators, DifferenceAnnihilatesExactDecay) {
  const auto w = exp_weights(DampingCoefficient::sinusoid(0.3, 0.1, 2.0), 0.4, 0.05);
  VectorXd z0(3);
  z0 << 0.3, -1.2, 2.0;
  const VectorXd z1 = (w.w_minus / w.w_plus) * z0;
  EXPECT_LE(op_D(w, z0, z1).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Operators, DifferenceConstantCoefficient) {
  const auto w = exp_weights(DampingCoefficient::constant(0.1), 0.0, 0.001);
  VectorXd one = VectorXd::Ones(1);
  EXPECT_NEAR(op_D(w, one, one)[0], 2.0 * std::sinh(5e-5) / 0.001, 1e-10);
}

TEST(Operators, LengthMismatchRejected) {
  const auto w = exp_weights(DampingCoefficient::zero(), 0.0, 0.1);
  EXPECT_THROW(op_A(w, VectorXd::Zero(2), VectorXd::Zero(3)), std::invalid_argument);
  EXPECT_THROW(op_D(w, VectorXd::Zero(2), VectorXd::Zero(3)), std::invalid_argument);
}

TEST(Operators, Linearity) {
  const auto w = exp_weights(DampingCoefficient::sinusoid(0.2, -0.1, 1.3), 0.1, 0.07);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd z(4), u(4), v(4), r(4);
    for (int i = 0; i < 4; ++i) {
      z[i] = unif(rng);
      u[i] = unif(rng);
      v[i] = unif(rng);
      r[i] = unif(rng);
    }
    const double al = unif(rng), be = unif(rng);
    const VectorXd lhsA = op_A(w, al * z + be * u, al * v + be * r);
    const VectorXd rhsA = al * op_A(w, z, v) + be * op_A(w, u, r);
    EXPECT_LE((lhsA - rhsA).cwiseAbs().maxCoeff(), 1e-14);
    const VectorXd lhsD = op_D(w, al * z + be * u, al * v + be * r);
    const VectorXd rhsD = al * op_D(w, z, v) + be * op_D(w, u, r);
    EXPECT_LE((lhsD - rhsD).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(ProductRule, ZeroCoefficient) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto a = DampingCoefficient::zero();
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd z0(5), z1(5), y0(5), y1(5);
    for (int i = 0; i < 5; ++i) {
      z0[i] = unif(rng);
      z1[i] = unif(rng);
      y0[i] = unif(rng);
      y1[i] = unif(rng);
    }
    EXPECT_LE(product_rule_residual(a, 0.3, 0.2, z0, z1, y0, y1), 1e-14);
  }
}

TEST(ProductRule, RandomizedTrials) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto constant = DampingCoefficient::constant(0.3);
  const auto sinus = DampingCoefficient::sinusoid(0.1, -0.2, M_PI);
  for (int trial = 0; trial < 1000; ++trial) {
    VectorXd z0(4), z1(4), y0(4), y1(4);
    double mag = 0.0;
    for (int i = 0; i < 4; ++i) {
      z0[i] = unif(rng);
      z1[i] = unif(rng);
      y0[i] = unif(rng);
      y1[i] = unif(rng);
      mag = std::max({mag, std::abs(z0[i]), std::abs(z1[i]), std::abs(y0[i]), std::abs(y1[i])});
    }
    const double t = 2.0 * unif(rng);
    const double dt = 0.05 + 0.4 * std::abs(unif(rng));
    const auto& coeff = (trial % 2 == 0) ? constant : sinus;
    EXPECT_LE(product_rule_residual(coeff, t, dt, z0, z1, y0, y1), 1e-13 * (1.0 + mag));
  }
}

TEST(ExpDiff, IdentityRelatesDifferenceOperators) {
  // d+t(e^{theta_i} y_i) = e^{theta_{i+1/2}} D^a y_i, to 1e-12 relative.
  const auto a = DampingCoefficient::sinusoid(0.1, -0.2, M_PI);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double t = 2.0 * unif(rng);
    const double dt = 0.02 + 0.3 * std::abs(unif(rng));
    const double y0 = unif(rng), y1 = unif(rng);
    const auto w = exp_weights(a, t, dt);
    const double lhs =
        (std::exp(theta(a, t + dt)) * y1 - std::exp(theta(a, t)) * y0) / dt;
    const double rhs = std::exp(theta(a, t + 0.5 * dt)) * op_D(w, y0, y1);
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST(Doubled, CoefficientDoublesRateAndTheta) {
  const auto a = DampingCoefficient::sinusoid(0.1, 0.3, 2.0);
  const auto a2 = a.doubled();
  EXPECT_DOUBLE_EQ(a2(0.7), 2.0 * a(0.7));
  EXPECT_DOUBLE_EQ(theta(a2, 0.9), 2.0 * theta(a, 0.9));
}
