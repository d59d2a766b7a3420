#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "expms/errors.hpp"

namespace expms {

using Eigen::VectorXd;

/// Scalar function of time.
using ScalarFn = std::function<double(double)>;

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1] via Newton iteration on P_n.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline void legendre_eval(int order, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= order; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = (order == 0) ? 1.0 : p1;
  dp = (order == 0) ? 0.0 : order * (x * p1 - p0) / (x * x - 1.0);
}

inline GaussLegendreRule make_gauss_legendre(int order) {
  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre_eval(order, x, p, dp);
      const double step = p / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    legendre_eval(order, x, p, dp);
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

inline const GaussLegendreRule& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make_gauss_legendre(order)).first;
  return it->second;
}

}  // namespace detail

/// Time-dependent damping rate a(t) together with its antiderivative
/// theta(t) = int_0^t a(s) ds.  When no closed-form antiderivative is
/// supplied, theta falls back to composite Gauss-Legendre quadrature.
struct DampingCoefficient {
  ScalarFn rate;               ///< a(t)
  ScalarFn antiderivative;     ///< theta(t), anchored so theta(0) = 0; may be empty
  ScalarFn rate_derivative;    ///< a'(t); central difference fallback when empty
  int quadrature_order = 4;    ///< Gauss-Legendre nodes per panel
  double panel_width = 0.01;   ///< maximum quadrature panel width

  bool has_antiderivative() const { return static_cast<bool>(antiderivative); }

  double operator()(double t) const { return rate(t); }

  double derivative(double t) const {
    if (rate_derivative) return rate_derivative(t);
    const double h = 1e-6;
    return (rate(t + h) - rate(t - h)) / (2.0 * h);
  }

  static DampingCoefficient zero() { return constant(0.0); }

  static DampingCoefficient constant(double value) {
    DampingCoefficient c;
    c.rate = [value](double) { return value; };
    c.antiderivative = [value](double t) { return value * t; };
    c.rate_derivative = [](double) { return 0.0; };
    return c;
  }

  /// a(t) = offset + amplitude * sin(frequency * t).
  static DampingCoefficient sinusoid(double offset, double amplitude, double frequency) {
    if (frequency == 0.0) return constant(offset);
    DampingCoefficient c;
    c.rate = [=](double t) { return offset + amplitude * std::sin(frequency * t); };
    c.antiderivative = [=](double t) {
      return offset * t + amplitude / frequency * (1.0 - std::cos(frequency * t));
    };
    c.rate_derivative = [=](double t) { return amplitude * frequency * std::cos(frequency * t); };
    return c;
  }

  /// Coefficient 2a(t) with antiderivative 2*theta(t); reuses one code path
  /// so the discrete product rule is exercised against the same quadrature.
  DampingCoefficient doubled() const {
    DampingCoefficient c;
    const ScalarFn r = rate;
    c.rate = [r](double t) { return 2.0 * r(t); };
    if (antiderivative) {
      const ScalarFn th = antiderivative;
      c.antiderivative = [th](double t) { return 2.0 * th(t); };
    }
    if (rate_derivative) {
      const ScalarFn rd = rate_derivative;
      c.rate_derivative = [rd](double t) { return 2.0 * rd(t); };
    }
    c.quadrature_order = quadrature_order;
    c.panel_width = panel_width;
    return c;
  }
};

/// Composite Gauss-Legendre quadrature of the rate over [t0, t1].
inline double integrate_rate(const DampingCoefficient& coeff, double t0, double t1) {
  if (t0 == t1) return 0.0;
  const auto& rule = detail::gauss_legendre(coeff.quadrature_order);
  const double width = std::min(coeff.panel_width, 0.01);
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(t1 - t0) / width)));
  const double h = (t1 - t0) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = t0 + p * h;
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = a + 0.5 * h * (rule.nodes[i] + 1.0);
      const double v = coeff.rate(t);
      if (!std::isfinite(v)) {
        throw EvaluationError("damping rate evaluated to a non-finite value at t = " +
                              std::to_string(t));
      }
      sum += rule.weights[i] * v;
    }
    total += 0.5 * h * sum;
  }
  return total;
}

/// theta(t) = int_0^t a(s) ds, exact when an antiderivative is supplied.
inline double theta(const DampingCoefficient& coeff, double t) {
  if (coeff.has_antiderivative()) {
    const double v = coeff.antiderivative(t);
    if (!std::isfinite(v)) {
      throw EvaluationError("damping antiderivative evaluated to a non-finite value at t = " +
                            std::to_string(t));
    }
    return v;
  }
  return integrate_rate(coeff, 0.0, t);
}

/// Exponential weights of one time step [t_i, t_i + dt]:
///   w_plus  = exp( int_{t_{i+1/2}}^{t_{i+1}} a )   (applied to the new level)
///   w_minus = exp( -int_{t_i}^{t_{i+1/2}} a )      (applied to the old level)
/// em_plus/em_minus are the expm1 forms w - 1, kept so that the difference
/// operator can be evaluated without amplifying roundoff by 1/dt.
struct ExponentialWeights {
  double w_plus = 1.0;
  double w_minus = 1.0;
  double em_plus = 0.0;
  double em_minus = 0.0;
  double t_i = 0.0;
  double dt = 0.0;

  static ExponentialWeights identity(double t_i, double dt) {
    ExponentialWeights w;
    w.t_i = t_i;
    w.dt = dt;
    return w;
  }
};

inline ExponentialWeights exp_weights(const DampingCoefficient& coeff, double t_i, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("exp_weights: dt must be positive");
  const double t_half = t_i + 0.5 * dt;
  const double t_next = t_i + dt;
  double int_plus, int_minus;
  if (coeff.has_antiderivative()) {
    const double th0 = theta(coeff, t_i);
    const double thh = theta(coeff, t_half);
    const double th1 = theta(coeff, t_next);
    int_plus = th1 - thh;
    int_minus = thh - th0;
  } else {
    int_plus = integrate_rate(coeff, t_half, t_next);
    int_minus = integrate_rate(coeff, t_i, t_half);
  }
  ExponentialWeights w;
  w.w_plus = std::exp(int_plus);
  w.w_minus = std::exp(-int_minus);
  w.em_plus = std::expm1(int_plus);
  w.em_minus = std::expm1(-int_minus);
  w.t_i = t_i;
  w.dt = dt;
  return w;
}

/// Weighted two-level average: (w_plus z_{i+1} + w_minus z_i) / 2.
inline VectorXd op_A(const ExponentialWeights& w, const VectorXd& z_i, const VectorXd& z_ip1) {
  if (z_i.size() != z_ip1.size()) throw std::invalid_argument("op_A: length mismatch");
  return 0.5 * (w.w_plus * z_ip1 + w.w_minus * z_i);
}

inline double op_A(const ExponentialWeights& w, double z_i, double z_ip1) {
  return 0.5 * (w.w_plus * z_ip1 + w.w_minus * z_i);
}

/// Weighted difference (w_plus z_{i+1} - w_minus z_i) / dt, evaluated as
/// ((z_{i+1} - z_i) + em_plus z_{i+1} - em_minus z_i) / dt so the
/// cancellation happens between exact inputs.
inline VectorXd op_D(const ExponentialWeights& w, const VectorXd& z_i, const VectorXd& z_ip1) {
  if (z_i.size() != z_ip1.size()) throw std::invalid_argument("op_D: length mismatch");
  return ((z_ip1 - z_i) + w.em_plus * z_ip1 - w.em_minus * z_i) / w.dt;
}

inline double op_D(const ExponentialWeights& w, double z_i, double z_ip1) {
  return ((z_ip1 - z_i) + w.em_plus * z_ip1 - w.em_minus * z_i) / w.dt;
}

/// | D^{2a}[z.y] - (D^a z).(A^a y) - (A^a z).(D^a y) |, a self-test of the
/// operator implementations against the discrete product rule.
inline double product_rule_residual(const DampingCoefficient& coeff, double t_i, double dt,
                                    const VectorXd& z_i, const VectorXd& z_ip1,
                                    const VectorXd& y_i, const VectorXd& y_ip1) {
  if (z_i.size() != z_ip1.size() || z_i.size() != y_i.size() || y_i.size() != y_ip1.size()) {
    throw std::invalid_argument("product_rule_residual: length mismatch");
  }
  const ExponentialWeights w = exp_weights(coeff, t_i, dt);
  const ExponentialWeights w2 = exp_weights(coeff.doubled(), t_i, dt);
  const double lhs = op_D(w2, z_i.dot(y_i), z_ip1.dot(y_ip1));
  const double rhs = op_D(w, z_i, z_ip1).dot(op_A(w, y_i, y_ip1)) +
                     op_A(w, z_i, z_ip1).dot(op_D(w, y_i, y_ip1));
  return std::abs(lhs - rhs);
}

}  // namespace expms
