#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "expms/system.hpp"

namespace expms {

namespace detail {

inline MatrixXd j2() {
  MatrixXd J(2, 2);
  J << 0, 1, -1, 0;
  return J;
}

inline void check_scalar_derivative(const std::function<double(double)>& f,
                                    const std::function<double(double)>& fp,
                                    const std::string& what) {
  const double h = 1e-6;
  for (double s : {-0.7, 0.13, 0.9}) {
    const double fd = (f(s + h) - f(s - h)) / (2.0 * h);
    if (std::abs(fd - fp(s)) > 1e-4 * (1.0 + std::abs(fp(s)))) {
      throw ConstructionError(what + " inconsistent with its stated derivative near s = " +
                              std::to_string(s));
    }
  }
}

}  // namespace detail

/// Semi-linear wave equation u_tt = u_xx - 2 a(t) u_t - f'(u) as a d = 4
/// multi-symplectic system, z = [u, v, w, p].  Smooth solutions embed as
/// z = [u, u_t, -u_x, 0].
inline MultiSymplecticSystem make_wave_system(std::function<double(double)> f,
                                              std::function<double(double)> f_prime,
                                              std::function<double(double)> f_second,
                                              DampingCoefficient a) {
  detail::check_scalar_derivative(f, f_prime, "wave potential f");
  detail::check_scalar_derivative(f_prime, f_second, "wave potential derivative f'");

  MultiSymplecticSystem sys;
  sys.dim = 4;
  const MatrixXd J = detail::j2();
  sys.K = MatrixXd::Zero(4, 4);
  sys.K.block<2, 2>(0, 0) = -J;
  sys.K.block<2, 2>(2, 2) = -J;
  sys.L = MatrixXd::Zero(4, 4);
  sys.L.block<2, 2>(0, 2) = -MatrixXd::Identity(2, 2);
  sys.L.block<2, 2>(2, 0) = MatrixXd::Identity(2, 2);
  sys.damping = a;

  sys.S = [f, a](const VectorXd& z, double t) {
    const double u = z[0], v = z[1], w = z[2], p = z[3];
    const double at = a(t);
    return at * (u * v + w * p) + 0.5 * (v * v - w * w) + f(u) + a.derivative(t) * p * p;
  };
  sys.grad_S = [f_prime, a](const VectorXd& z, double t) {
    const double u = z[0], v = z[1], w = z[2], p = z[3];
    const double at = a(t);
    VectorXd g(4);
    g << at * v + f_prime(u), at * u + v, at * p - w, at * w + 2.0 * a.derivative(t) * p;
    return g;
  };
  sys.hess_S = [f_second, a](const VectorXd& z, double t) {
    const double at = a(t);
    MatrixXd H = MatrixXd::Zero(4, 4);
    H(0, 0) = f_second(z[0]);
    H(0, 1) = H(1, 0) = at;
    H(1, 1) = 1.0;
    H(2, 2) = -1.0;
    H(2, 3) = H(3, 2) = at;
    H(3, 3) = 2.0 * a.derivative(t);
    return H;
  };
  return sys;
}

/// Generalized KdV u_t + u^{k-1} u_x + a(t) u + b(t) u_xxx = 0 as a d = 4
/// system, z = [phi, u, v, w].
inline MultiSymplecticSystem make_kdv_system(int k, DampingCoefficient a,
                                             std::function<double(double)> b) {
  if (k < 1) throw ConstructionError("make_kdv_system: k must be a positive integer");

  MultiSymplecticSystem sys;
  sys.dim = 4;
  const MatrixXd J = detail::j2();
  sys.K = MatrixXd::Zero(4, 4);
  sys.K.block<2, 2>(0, 0) = J;
  sys.L = MatrixXd::Zero(4, 4);
  sys.L.block<2, 2>(0, 2) = J;
  sys.L.block<2, 2>(2, 0) = J;
  sys.damping = a;

  auto b_checked = [b](double t) {
    const double bt = b(t);
    if (!(bt > 0.0)) {
      throw EvaluationError("KdV dispersion coefficient b(t) <= 0 at t = " + std::to_string(t));
    }
    return bt;
  };
  sys.S = [b_checked, k](const VectorXd& z, double t) {
    const double u = z[1], v = z[2], w = z[3];
    return v * v / (4.0 * b_checked(t)) - u * w +
           2.0 * std::pow(u, k + 1) / (k * (k + 1.0));
  };
  sys.grad_S = [b_checked, k](const VectorXd& z, double t) {
    const double u = z[1], v = z[2], w = z[3];
    VectorXd g(4);
    g << 0.0, -w + 2.0 * std::pow(u, k) / k, v / (2.0 * b_checked(t)), -u;
    return g;
  };
  sys.hess_S = [b_checked, k](const VectorXd& z, double t) {
    const double u = z[1];
    MatrixXd H = MatrixXd::Zero(4, 4);
    H(1, 1) = 2.0 * std::pow(u, k - 1);
    H(1, 3) = H(3, 1) = -1.0;
    H(2, 2) = 1.0 / (2.0 * b_checked(t));
    return H;
  };
  return sys;
}

/// Parameters of the damped-driven NLS nonlinearity.  V_prime takes the
/// squared modulus s = p^2 + q^2; the default V(s) = s^2/2 is the cubic case.
struct NlsNonlinearity {
  std::function<double(double)> V;
  std::function<double(double)> V_prime;
  std::function<double(double)> V_second;

  static NlsNonlinearity cubic() {
    NlsNonlinearity n;
    n.V = [](double s) { return 0.5 * s * s; };
    n.V_prime = [](double s) { return s; };
    n.V_second = [](double) { return 1.0; };
    return n;
  }

  static NlsNonlinearity none() {
    NlsNonlinearity n;
    n.V = [](double) { return 0.0; };
    n.V_prime = [](double) { return 0.0; };
    n.V_second = [](double) { return 0.0; };
    return n;
  }
};

/// Damped-driven NLS i psi_t + psi_xx + i gamma psi + c e^{i omega t} psi
/// + V'(|psi|^2) psi = 0, z = [p, q, v, w], damping a(t) = gamma + c sin(omega t).
inline MultiSymplecticSystem make_nls_system(NlsNonlinearity nl, double gamma, double c,
                                             double omega) {
  detail::check_scalar_derivative(nl.V, nl.V_prime, "NLS potential V");
  detail::check_scalar_derivative(nl.V_prime, nl.V_second, "NLS potential derivative V'");

  MultiSymplecticSystem sys;
  sys.dim = 4;
  const MatrixXd J = detail::j2();
  sys.K = MatrixXd::Zero(4, 4);
  sys.K.block<2, 2>(0, 0) = J;
  sys.L = MatrixXd::Zero(4, 4);
  sys.L.block<2, 2>(0, 2) = -MatrixXd::Identity(2, 2);
  sys.L.block<2, 2>(2, 0) = MatrixXd::Identity(2, 2);
  sys.damping = DampingCoefficient::sinusoid(gamma, c, omega);

  auto alpha = [c, omega](double t) { return c * std::cos(omega * t); };
  sys.S = [nl, alpha](const VectorXd& z, double t) {
    const double p = z[0], q = z[1], v = z[2], w = z[3];
    const double rho = p * p + q * q;
    return 0.5 * (v * v + w * w + nl.V(rho) + alpha(t) * rho);
  };
  sys.grad_S = [nl, alpha](const VectorXd& z, double t) {
    const double p = z[0], q = z[1];
    const double rho = p * p + q * q;
    const double vp = nl.V_prime(rho) + alpha(t);
    VectorXd g(4);
    g << vp * p, vp * q, z[2], z[3];
    return g;
  };
  sys.hess_S = [nl, alpha](const VectorXd& z, double t) {
    const double p = z[0], q = z[1];
    const double rho = p * p + q * q;
    const double vp = nl.V_prime(rho) + alpha(t);
    const double vpp = nl.V_second(rho);
    MatrixXd H = MatrixXd::Zero(4, 4);
    H(0, 0) = vp + 2.0 * p * p * vpp;
    H(1, 1) = vp + 2.0 * q * q * vpp;
    H(0, 1) = H(1, 0) = 2.0 * p * q * vpp;
    H(2, 2) = H(3, 3) = 1.0;
    return H;
  };
  return sys;
}

/// NLS with conjugate parametric forcing c e^{i omega t} psi*; constant
/// damping a(t) = gamma, the trigonometric terms move into S.
inline MultiSymplecticSystem make_nls_conjugate_system(NlsNonlinearity nl, double gamma, double c,
                                                       double omega) {
  detail::check_scalar_derivative(nl.V, nl.V_prime, "NLS potential V");
  detail::check_scalar_derivative(nl.V_prime, nl.V_second, "NLS potential derivative V'");

  MultiSymplecticSystem sys = make_nls_system(nl, gamma, 0.0, omega);
  sys.damping = DampingCoefficient::constant(gamma);

  auto alpha = [c, omega](double t) { return c * std::cos(omega * t); };
  auto beta = [c, omega](double t) { return c * std::sin(omega * t); };
  sys.S = [nl, alpha, beta](const VectorXd& z, double t) {
    const double p = z[0], q = z[1], v = z[2], w = z[3];
    const double rho = p * p + q * q;
    return 0.5 * (v * v + w * w + nl.V(rho) + alpha(t) * rho + 2.0 * beta(t) * q * p);
  };
  sys.grad_S = [nl, alpha, beta](const VectorXd& z, double t) {
    const double p = z[0], q = z[1];
    const double rho = p * p + q * q;
    const double vp = nl.V_prime(rho) + alpha(t);
    const double bt = beta(t);
    VectorXd g(4);
    g << vp * p + bt * q, vp * q + bt * p, z[2], z[3];
    return g;
  };
  sys.hess_S = [nl, alpha, beta](const VectorXd& z, double t) {
    const double p = z[0], q = z[1];
    const double rho = p * p + q * q;
    const double vp = nl.V_prime(rho) + alpha(t);
    const double vpp = nl.V_second(rho);
    MatrixXd H = MatrixXd::Zero(4, 4);
    H(0, 0) = vp + 2.0 * p * p * vpp;
    H(1, 1) = vp + 2.0 * q * q * vpp;
    H(0, 1) = H(1, 0) = 2.0 * p * q * vpp + beta(t);
    H(2, 2) = H(3, 3) = 1.0;
    return H;
  };
  return sys;
}

/// Damped-driven Camassa-Holm equation as a d = 5 system, z = [u, v, w, q, p].
inline MultiSymplecticSystem make_ch_system(DampingCoefficient gamma,
                                            std::function<double(double, double)> f = nullptr) {
  MultiSymplecticSystem sys;
  sys.dim = 5;
  sys.K = MatrixXd::Zero(5, 5);
  sys.K(0, 1) = 0.5;
  sys.K(1, 0) = -0.5;
  sys.K(0, 4) = -0.5;
  sys.K(4, 0) = 0.5;
  sys.L = MatrixXd::Zero(5, 5);
  sys.L(0, 3) = -1.0;
  sys.L(3, 0) = 1.0;
  sys.L(1, 2) = 1.0;
  sys.L(2, 1) = -1.0;
  sys.damping = gamma;

  sys.S = [gamma](const VectorXd& z, double t) {
    const double u = z[0], w = z[2], q = z[3], p = z[4];
    return -0.5 * u * u * u - 0.5 * u * p * p - u * w + q * p + 0.5 * gamma(t) * u * p;
  };
  sys.grad_S = [gamma](const VectorXd& z, double t) {
    const double u = z[0], w = z[2], q = z[3], p = z[4];
    const double gt = gamma(t);
    VectorXd g(5);
    g << -1.5 * u * u - 0.5 * p * p - w + 0.5 * gt * p, 0.0, -u, p, -u * p + q + 0.5 * gt * u;
    return g;
  };
  sys.hess_S = [gamma](const VectorXd& z, double t) {
    const double u = z[0], p = z[4];
    const double gt = gamma(t);
    MatrixXd H = MatrixXd::Zero(5, 5);
    H(0, 0) = -3.0 * u;
    H(0, 2) = H(2, 0) = -1.0;
    H(0, 4) = H(4, 0) = -p + 0.5 * gt;
    H(3, 4) = H(4, 3) = 1.0;
    H(4, 4) = -u;
    return H;
  };
  if (f) {
    sys.forcing = [f](double x, double t) {
      VectorXd F = VectorXd::Zero(5);
      F[0] = f(x, t);
      return F;
    };
  }
  return sys;
}

/// Phase-rotation action for the NLS systems: B = blockdiag(R, R) with
/// R the rotation generator, so z^T K B z = p^2 + q^2.  Verified against
/// the system's gradient on random samples before being marked usable.
inline QuadraticInvariantAction norm_action(const MultiSymplecticSystem& sys) {
  if (sys.dim != 4) throw ConstructionError("norm_action: expected a 4-component NLS system");
  MatrixXd R(2, 2);
  R << 0, -1, 1, 0;
  MatrixXd B = MatrixXd::Zero(4, 4);
  B.block<2, 2>(0, 0) = R;
  B.block<2, 2>(2, 2) = R;

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd z(4);
    for (int i = 0; i < 4; ++i) z[i] = unif(rng);
    const double t = 2.0 * unif(rng);
    const VectorXd g = sys.grad_S(z, t);
    const double defect = std::abs((B * z).dot(g));
    if (defect > 1e-12 * (1.0 + g.norm() * z.norm())) {
      throw ConstructionError("norm_action: S is not invariant under the phase rotation");
    }
  }
  return {B, true};
}

}  // namespace expms
