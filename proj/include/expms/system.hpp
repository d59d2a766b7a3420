#pragma once

#include <functional>
#include <random>
#include <string>

#include <Eigen/Core>

#include "expms/damping.hpp"
#include "expms/errors.hpp"

namespace expms {

/// Damped/driven multi-symplectic system
///   K z_t + L z_x = grad S(z, t) - a(t) K z + F(x, t)
/// with skew-symmetric K, L.
struct MultiSymplecticSystem {
  int dim = 0;
  MatrixXd K;
  MatrixXd L;
  std::function<double(const VectorXd&, double)> S;
  std::function<VectorXd(const VectorXd&, double)> grad_S;
  std::function<MatrixXd(const VectorXd&, double)> hess_S;
  std::function<VectorXd(double, double)> forcing;  ///< F(x, t); may be empty
  DampingCoefficient damping;

  bool has_forcing() const { return static_cast<bool>(forcing); }
};

/// Matrix B generating a symmetry of S: (Bz)^T grad S(z,t) = 0.  Only
/// verified actions may be used in the quadratic-invariant diagnostic.
struct QuadraticInvariantAction {
  MatrixXd B;
  bool verified = false;
};

inline void require_skew(const MatrixXd& M, const std::string& name) {
  if ((M + M.transpose()).cwiseAbs().maxCoeff() != 0.0) {
    throw ConstructionError(name + " is not skew-symmetric");
  }
}

/// Max relative error of grad_S against a central difference of S.
inline double max_gradient_fd_error(const MultiSymplecticSystem& sys, int trials = 20,
                                    unsigned seed = 12345) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    VectorXd z(sys.dim);
    for (int i = 0; i < sys.dim; ++i) z[i] = unif(rng);
    const double t = 2.0 * unif(rng);
    const VectorXd g = sys.grad_S(z, t);
    for (int i = 0; i < sys.dim; ++i) {
      VectorXd zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double fd = (sys.S(zp, t) - sys.S(zm, t)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - g[i]) / (1.0 + std::abs(g[i])));
    }
  }
  return worst;
}

/// Max relative error of hess_S against a central difference of grad_S.
inline double max_hessian_fd_error(const MultiSymplecticSystem& sys, int trials = 10,
                                   unsigned seed = 54321) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    VectorXd z(sys.dim);
    for (int i = 0; i < sys.dim; ++i) z[i] = unif(rng);
    const double t = 2.0 * unif(rng);
    const MatrixXd H = sys.hess_S(z, t);
    for (int i = 0; i < sys.dim; ++i) {
      VectorXd zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const VectorXd col = (sys.grad_S(zp, t) - sys.grad_S(zm, t)) / (2.0 * h);
      for (int j = 0; j < sys.dim; ++j) {
        worst = std::max(worst, std::abs(col[j] - H(j, i)) / (1.0 + std::abs(H(j, i))));
      }
    }
  }
  return worst;
}

inline double max_hessian_asymmetry(const MultiSymplecticSystem& sys, int trials = 10,
                                    unsigned seed = 777) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    VectorXd z(sys.dim);
    for (int i = 0; i < sys.dim; ++i) z[i] = unif(rng);
    const MatrixXd H = sys.hess_S(z, 2.0 * unif(rng));
    worst = std::max(worst, (H - H.transpose()).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace expms
