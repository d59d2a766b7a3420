#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "expms/diagnostics.hpp"
#include "expms/ic.hpp"
#include "expms/models.hpp"
#include "expms/schemes.hpp"

using namespace expms;

namespace {

std::mt19937_64 g_rng(2718);

double urand() {
  static std::uniform_real_distribution<double> unif(-1.0, 1.0);
  return unif(g_rng);
}

MatrixXd random_matrix(int rows, int cols, double scale = 1.0) {
  MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = scale * urand();
  }
  return m;
}

/// Smooth periodic random field: a few low Fourier modes per component.
MatrixXd smooth_values(const Grid1D& grid, int dim, unsigned seed, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  MatrixXd V = MatrixXd::Zero(grid.n_nodes, dim);
  const double span = grid.x_max - grid.x_min;
  for (int j = 0; j < dim; ++j) {
    for (int mode = 1; mode <= 3; ++mode) {
      const double a = scale * unif(rng) / mode, b = scale * unif(rng) / mode, ph = unif(rng);
      for (int n = 0; n < grid.n_nodes; ++n) {
        const double x = grid.node(n);
        V(n, j) += a * std::sin(2.0 * M_PI * mode * (x - grid.x_min) / span + ph) +
                   b * std::cos(2.0 * M_PI * mode * (x - grid.x_min) / span);
      }
    }
  }
  return V;
}

MultiSymplecticSystem decay_system(DampingCoefficient a) {
  MultiSymplecticSystem sys;
  sys.dim = 2;
  sys.K = MatrixXd::Zero(2, 2);
  sys.K(0, 1) = 1.0;
  sys.K(1, 0) = -1.0;
  sys.L = MatrixXd::Zero(2, 2);
  sys.S = [](const VectorXd&, double) { return 0.0; };
  sys.grad_S = [](const VectorXd&, double) { return VectorXd::Zero(2).eval(); };
  sys.hess_S = [](const VectorXd&, double) { return MatrixXd::Zero(2, 2).eval(); };
  sys.damping = a;
  return sys;
}

MultiSymplecticSystem cubic_nls() {
  return make_nls_system(NlsNonlinearity::cubic(), 0.1, -0.2, M_PI);
}

/// Quadratic-S system (V = 0); the NLS matrices with S = (v^2+w^2+alpha rho)/2.
MultiSymplecticSystem quadratic_nls() {
  return make_nls_system(NlsNonlinearity::none(), 0.1, -0.2, M_PI);
}

}  // namespace

TEST(SplitL, NlsAndChMatrices) {
  const auto nls = cubic_nls();
  const LSplit s = split_L(nls.L);
  MatrixXd expected_plus = MatrixXd::Zero(4, 4);
  expected_plus.block<2, 2>(0, 2) = -MatrixXd::Identity(2, 2);
  EXPECT_DOUBLE_EQ((s.L_plus - expected_plus).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ((s.L_plus + s.L_minus - nls.L).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ((s.L_plus + s.L_minus.transpose()).cwiseAbs().maxCoeff(), 0.0);

  const LSplit zero = split_L(MatrixXd::Zero(3, 3));
  EXPECT_DOUBLE_EQ(zero.L_plus.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(zero.L_minus.cwiseAbs().maxCoeff(), 0.0);

  const auto ch = make_ch_system(DampingCoefficient::zero());
  const LSplit cs = split_L(ch.L);
  EXPECT_DOUBLE_EQ((cs.L_plus + cs.L_minus.transpose()).cwiseAbs().maxCoeff(), 0.0);

  MatrixXd not_skew = MatrixXd::Identity(2, 2);
  EXPECT_THROW(split_L(not_skew), ConstructionError);
}

TEST(DiscreteGradient, IncrementIdentityAndLimits) {
  const auto sys = cubic_nls();
  for (int trial = 0; trial < 50; ++trial) {
    VectorXd zh = random_matrix(4, 1), z = random_matrix(4, 1);
    const double t = urand();
    const VectorXd g = discrete_gradient(sys.S, sys.grad_S, zh, z, t);
    EXPECT_LE(std::abs(g.dot(zh - z) - (sys.S(zh, t) - sys.S(z, t))), 1e-13);
  }
  // z_hat -> z limit returns grad S(z)
  VectorXd z = random_matrix(4, 1);
  const VectorXd g = discrete_gradient(sys.S, sys.grad_S, z, z, 0.3);
  EXPECT_LE((g - sys.grad_S(z, 0.3)).cwiseAbs().maxCoeff(), 1e-14);

  // quadratic S: correction vanishes, g = grad S(midpoint) exactly
  const auto quad = quadratic_nls();
  VectorXd zh2 = random_matrix(4, 1), z2 = random_matrix(4, 1);
  const VectorXd gq = discrete_gradient(quad.S, quad.grad_S, zh2, z2, 0.7);
  const VectorXd gm = quad.grad_S(0.5 * (zh2 + z2), 0.7);
  EXPECT_LE((gq - gm).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(DiscreteGradient, JacobiansMatchFiniteDifferences) {
  const auto sys = cubic_nls();
  VectorXd zh = random_matrix(4, 1), z = random_matrix(4, 1);
  const double t = 0.4, eps = 1e-7;
  VectorXd g;
  MatrixXd dgh, dgz;
  detail::discrete_gradient_jacobians(sys, zh, z, t, g, dgh, dgz);
  EXPECT_LE((g - discrete_gradient(sys.S, sys.grad_S, zh, z, t)).cwiseAbs().maxCoeff(), 1e-15);
  for (int j = 0; j < 4; ++j) {
    VectorXd zhp = zh, zp = z;
    zhp[j] += eps;
    zp[j] += eps;
    const VectorXd colh =
        (discrete_gradient(sys.S, sys.grad_S, zhp, z, t) - g) / eps;
    const VectorXd colz =
        (discrete_gradient(sys.S, sys.grad_S, zh, zp, t) - g) / eps;
    EXPECT_LE((colh - dgh.col(j)).cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_LE((colz - dgz.col(j)).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Schemes, JacobiansMatchFiniteDifferences) {
  // analytic assembly vs finite differences, all kinds, both boundaries
  const Grid1D periodic{8, 0.0, 4.0, Boundary::periodic};
  const Grid1D anti{8, 0.0, 4.0, Boundary::antiperiodic};
  auto forced = cubic_nls();
  forced.forcing = [](double x, double t) {
    VectorXd F(4);
    F << 0.1 * std::sin(x) * std::cos(t), -0.05 * std::cos(2 * x), 0.02 * std::sin(x + t), 0.0;
    return F;
  };
  const auto unforced = cubic_nls();

  for (const Grid1D& grid : {periodic, anti}) {
    for (SchemeKind kind : {SchemeKind::embs, SchemeKind::expbox, SchemeKind::expdg,
                            SchemeKind::midpoint_box, SchemeKind::mixed_euler}) {
      const MultiSymplecticSystem& sys = (kind == SchemeKind::expdg) ? unforced : forced;
      const MatrixXd Z0 = smooth_values(grid, 4, 11);
      const MatrixXd Z1 = Z0 + 0.01 * random_matrix(grid.n_nodes, 4);
      const auto ctx = detail::make_context(sys, grid, 0.2, 0.05, kind);

      for (bool wrt_new : {true, false}) {
        const MatrixXd J = detail::scheme_jacobian(ctx, Z0, Z1, wrt_new);
        const double eps = 1e-7;
        const VectorXd base = detail::flatten(detail::scheme_residual(ctx, Z0, Z1));
        MatrixXd fd(base.size(), base.size());
        for (int j = 0; j < base.size(); ++j) {
          MatrixXd Z0p = Z0, Z1p = Z1;
          (wrt_new ? Z1p : Z0p)(j / 4, j % 4) += eps;
          fd.col(j) = (detail::flatten(detail::scheme_residual(ctx, Z0p, Z1p)) - base) / eps;
        }
        EXPECT_LE((fd - J).cwiseAbs().maxCoeff(), 2e-5)
            << to_string(kind) << " wrt_new=" << wrt_new
            << " boundary=" << (grid.boundary == Boundary::periodic ? "periodic" : "anti");
      }
    }
  }
}

TEST(StepEmbs, ConstantFieldIsFixedPointOfTrivialSystem) {
  const auto sys = decay_system(DampingCoefficient::zero());
  StateField field;
  field.grid = {6, 0.0, 3.0, Boundary::periodic};
  field.values = MatrixXd::Constant(6, 2, 0.8);
  field.t = 0.0;
  const StateField next = step_embs(sys, field, 0.1, {});
  EXPECT_LE((next.values - field.values).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(StepEmbs, NormLawAfterOneStepFromDarkSoliton) {
  const Grid1D grid{600, -30.0, 30.0, Boundary::antiperiodic};
  const auto sys = cubic_nls();
  const ComplexField psi0 = std::get<ComplexField>(ic_library("tanh_dark", grid));
  StateField z = lift_nls_state(psi0);
  NewtonConfig cfg;
  cfg.tol = 1e-13;
  const StateField z1 = step_embs(sys, z, 0.001, cfg);
  const NormLawResult law =
      norm_law_residual(project_nls_state(z), project_nls_state(z1), sys.damping, 0.001);
  EXPECT_LE(law.max_node_residual, 1e-10);
  EXPECT_LE(law.global_residual, 1e-10);
}

TEST(StepEmbs, LinearSchroedingerPlaneWaveModulus) {
  // V = 0, gamma = c = 0: each Fourier mode advances by a unit-modulus factor
  const int N = 32;
  const Grid1D grid{N, 0.0, 2.0 * M_PI, Boundary::periodic};
  const auto sys = make_nls_system(NlsNonlinearity::none(), 0.0, 0.0, 1.0);
  ComplexField psi;
  psi.grid = grid;
  psi.p.resize(N);
  psi.q.resize(N);
  const int k = 3;
  for (int n = 0; n < N; ++n) {
    psi.p[n] = std::cos(k * grid.node(n));
    psi.q[n] = std::sin(k * grid.node(n));
  }
  StateField z = lift_nls_state(psi);
  NewtonConfig cfg;
  cfg.tol = 1e-13;
  for (int step = 0; step < 100; ++step) z = step_embs(sys, z, 0.01, cfg);
  for (int n = 0; n < N; ++n) {
    const double mod = std::hypot(z.values(n, 0), z.values(n, 1));
    EXPECT_NEAR(mod, 1.0, 1e-12);
  }
}

TEST(StepExpbox, ZeroFieldStaysZero) {
  const auto sys = quadratic_nls();
  StateField field;
  field.grid = {10, 0.0, 5.0, Boundary::periodic};
  field.values = MatrixXd::Zero(10, 4);
  field.t = 0.0;
  const StateField next = step_expbox(sys, field, 0.01, {});
  EXPECT_LE(next.values.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(StepExpbox, UndampedCaseMatchesIndependentBoxScheme) {
  // a = 0: the residual must agree with an independently coded Preissmann
  // box scheme evaluated on the same random input.
  const Grid1D grid{12, 0.0, 6.0, Boundary::periodic};
  const auto sys = make_nls_system(NlsNonlinearity::cubic(), 0.0, 0.0, 1.0);
  ASSERT_DOUBLE_EQ(sys.damping(0.33), 0.0);
  const MatrixXd Z0 = random_matrix(12, 4, 0.5);
  const MatrixXd Z1 = random_matrix(12, 4, 0.5);
  const double t = 0.3, dt = 0.02, dx = grid.dx();
  const auto ctx = detail::make_context(sys, grid, t, dt, SchemeKind::expbox);
  const MatrixXd R = detail::scheme_residual(ctx, Z0, Z1);

  for (int n = 0; n < 12; ++n) {
    const int np = (n + 1) % 12;
    const VectorXd d_n = (Z1.row(n) - Z0.row(n)) / dt;
    const VectorXd d_np = (Z1.row(np) - Z0.row(np)) / dt;
    const VectorXd a_n = 0.5 * (Z1.row(n) + Z0.row(n));
    const VectorXd a_np = 0.5 * (Z1.row(np) + Z0.row(np));
    const VectorXd oracle = sys.K * (0.5 * (d_n + d_np)) + sys.L * ((a_np - a_n) / dx) -
                            sys.grad_S(0.5 * (a_n + a_np), t + 0.5 * dt);
    EXPECT_LE((R.row(n).transpose() - oracle).cwiseAbs().maxCoeff(), 1e-14) << "node " << n;
  }
}

TEST(StepExpbox, TwoFormLawAfterOneStepQuadraticS) {
  const Grid1D grid{16, 0.0, 8.0, Boundary::periodic};
  const auto sys = quadratic_nls();
  StateField field;
  field.grid = grid;
  field.values = smooth_values(grid, 4, 5);
  field.t = 0.1;
  NewtonConfig cfg;
  cfg.tol = 1e-13;
  const StateField next = step_expbox(sys, field, 0.01, cfg);

  TangentPair pair;
  pair.du_prev = random_matrix(16, 4);
  pair.dv_prev = random_matrix(16, 4);
  pair.du_next = tangent_step(sys, field, next, pair.du_prev, 0.01, SchemeKind::expbox);
  pair.dv_next = tangent_step(sys, field, next, pair.dv_prev, 0.01, SchemeKind::expbox);
  EXPECT_LE(twoform_residual(field, next, pair, sys, SchemeKind::expbox, 0.01), 1e-11);
}

TEST(StepExpdg, MatchesExpboxForQuadraticS) {
  // the midpoint discrete gradient of a quadratic S is the midpoint gradient
  const Grid1D grid{14, 0.0, 7.0, Boundary::periodic};
  const auto sys = quadratic_nls();
  StateField field;
  field.grid = grid;
  field.values = smooth_values(grid, 4, 9);
  field.t = 0.25;
  NewtonConfig cfg;
  cfg.tol = 1e-13;
  const StateField a = step_expbox(sys, field, 0.02, cfg);
  const StateField b = step_expdg(sys, field, 0.02, cfg);
  EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StepExpdg, MomentumLawOnConjugateForcedNls) {
  const Grid1D grid{24, 0.0, 12.0, Boundary::periodic};
  const auto sys = make_nls_conjugate_system(NlsNonlinearity::cubic(), 0.1, 0.3, 2.0);
  StateField field;
  field.grid = grid;
  field.values = smooth_values(grid, 4, 21);
  field.t = 0.0;
  NewtonConfig cfg;
  cfg.tol = 1e-13;
  StateField prev = field;
  for (int step = 0; step < 5; ++step) {
    const StateField next = step_expdg(sys, prev, 0.01, cfg);
    EXPECT_LE(momentum_law_residual(prev, next, sys, 0.01), 1e-9);
    prev = next;
  }
}

TEST(StepExpdg, ForcingRejected) {
  auto sys = cubic_nls();
  sys.forcing = [](double, double) { return VectorXd::Zero(4).eval(); };
  StateField field;
  field.grid = {8, 0.0, 4.0, Boundary::periodic};
  field.values = MatrixXd::Zero(8, 4);
  EXPECT_THROW(step_expdg(sys, field, 0.01, {}), ConfigurationError);
}

TEST(TangentStep, LinearSystemTangentEqualsStep) {
  // S = 0 makes the step map linear; the tangent map is the step map itself.
  auto sys = decay_system(DampingCoefficient::sinusoid(0.2, 0.1, 1.5));
  sys.L = MatrixXd::Zero(2, 2);
  sys.L(0, 1) = 0.7;
  sys.L(1, 0) = -0.7;
  StateField field;
  field.grid = {10, 0.0, 5.0, Boundary::periodic};
  field.values = smooth_values(field.grid, 2, 31);
  field.t = 0.3;
  NewtonConfig cfg;
  cfg.tol = 1e-14;
  const StateField next = step_embs(sys, field, 0.04, cfg);

  const MatrixXd dz = random_matrix(10, 2);
  const MatrixXd tangent = tangent_step(sys, field, next, dz, 0.04, SchemeKind::embs);

  StateField dz_field;
  dz_field.grid = field.grid;
  dz_field.values = dz;
  dz_field.t = field.t;
  const StateField dz_next = step_embs(sys, dz_field, 0.04, cfg);
  EXPECT_LE((tangent - dz_next.values).cwiseAbs().maxCoeff(), 1e-11);

  // dz = 0 -> 0
  const MatrixXd zero = tangent_step(sys, field, next, MatrixXd::Zero(10, 2), 0.04,
                                     SchemeKind::embs);
  EXPECT_DOUBLE_EQ(zero.cwiseAbs().maxCoeff(), 0.0);
}

TEST(TangentStep, MatchesDirectionalFiniteDifference) {
  const Grid1D grid{12, 0.0, 6.0, Boundary::periodic};
  const auto sys = cubic_nls();
  StateField field;
  field.grid = grid;
  field.values = smooth_values(grid, 4, 77);
  field.t = 0.15;
  NewtonConfig cfg;
  cfg.tol = 1e-14;

  for (SchemeKind kind : {SchemeKind::embs, SchemeKind::expbox, SchemeKind::expdg}) {
    const StateField next = step_scheme(sys, field, 0.01, kind, cfg);
    const MatrixXd dz = random_matrix(12, 4);
    const MatrixXd tangent = tangent_step(sys, field, next, dz, 0.01, kind);

    const double eps = 1e-6;
    StateField perturbed = field;
    perturbed.values += eps * dz;
    const StateField next_p = step_scheme(sys, perturbed, 0.01, kind, cfg);
    const MatrixXd fd = (next_p.values - next.values) / eps;
    const double rel =
        (fd - tangent).cwiseAbs().maxCoeff() / (1.0 + tangent.cwiseAbs().maxCoeff());
    EXPECT_LE(rel, 1e-4) << to_string(kind);
  }
}

TEST(Schemes, PureDecayReproducesExponentialEnvelope) {
  // S = 0, L = 0, F = 0: z^{i+1} = exp(-(theta_{i+1} - theta_i)) z^i exactly.
  const auto a = DampingCoefficient::sinusoid(0.1, -0.2, M_PI);
  const auto sys = decay_system(a);
  StateField field;
  field.grid = {4, 0.0, 2.0, Boundary::periodic};
  field.values = random_matrix(4, 2);
  field.t = 0.0;
  const MatrixXd z0 = field.values;
  NewtonConfig cfg;
  cfg.tol = 1e-14;
  const double dt = 0.01;
  const int steps = 1000;
  StateField z = field;
  for (int i = 0; i < steps; ++i) z = step_expbox(sys, z, dt, cfg);
  const double envelope = std::exp(-(theta(a, steps * dt) - theta(a, 0.0)));
  EXPECT_LE((z.values - envelope * z0).cwiseAbs().maxCoeff(), 1e-12);

  StateField ze = field;
  for (int i = 0; i < steps; ++i) ze = step_embs(sys, ze, dt, cfg);
  EXPECT_LE((ze.values - envelope * z0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Schemes, SecondOrderSelfConvergence) {
  // one-step-free sanity: integrate cubic NLS to T with dt, dt/2, dt/4 and
  // compare against dt/8; observed order must sit in [1.8, 2.2].
  const Grid1D grid{24, -6.0, 6.0, Boundary::periodic};
  const auto sys = cubic_nls();
  StateField init;
  init.grid = grid;
  init.values = smooth_values(grid, 4, 55);
  init.t = 0.0;
  NewtonConfig cfg;
  cfg.tol = 1e-13;
  const double T = 0.4;

  for (SchemeKind kind : {SchemeKind::embs, SchemeKind::expbox, SchemeKind::expdg}) {
    auto integrate = [&](double dt) {
      StateField z = init;
      const int n = static_cast<int>(std::llround(T / dt));
      for (int i = 0; i < n; ++i) z = step_scheme(sys, z, dt, kind, cfg);
      return z.values;
    };
    const MatrixXd ref = integrate(T / 64);
    const double e1 = (integrate(T / 8) - ref).norm();
    const double e2 = (integrate(T / 16) - ref).norm();
    const double e3 = (integrate(T / 32) - ref).norm();
    const double order12 = std::log2(e1 / e2);
    const double order23 = std::log2(e2 / e3);
    EXPECT_GE(order12, 1.8) << to_string(kind);
    EXPECT_LE(order12, 2.2) << to_string(kind);
    EXPECT_GE(order23, 1.7) << to_string(kind);  // closer to the reference, noisier
    EXPECT_LE(order23, 2.3) << to_string(kind);
  }
}
