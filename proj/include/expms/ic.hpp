#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <variant>

#include "expms/ch.hpp"
#include "expms/nls.hpp"

namespace expms {

using InitialField = std::variant<ComplexField, CHField>;

/// Named initial profiles of the experiments:
///   tanh_dark     psi(x,0) = tanh(x)
///   gaussian      psi(x,0) = sqrt(2/(3 sqrt(pi))) exp(-(2x/3)^2/2)
///   soliton_pair  psi(x,0) = e^{8ix} sech(x+5) + 1.5 e^{-7ix} sech(1.5(x-5))
///   ch_cosine     u(x,0) = 0.2 + 0.1 cos(3x)
///   ch_kink       u(x,0) = e^{-|x|}
inline InitialField ic_library(const std::string& name, const Grid1D& grid) {
  const int N = grid.n_nodes;
  auto sech = [](double x) { return 1.0 / std::cosh(x); };

  if (name == "tanh_dark" || name == "gaussian" || name == "soliton_pair") {
    ComplexField f;
    f.grid = grid;
    f.p.resize(N);
    f.q.resize(N);
    for (int n = 0; n < N; ++n) {
      const double x = grid.node(n);
      std::complex<double> psi;
      if (name == "tanh_dark") {
        psi = std::tanh(x);
      } else if (name == "gaussian") {
        psi = std::sqrt(2.0 / (3.0 * std::sqrt(M_PI))) * std::exp(-0.5 * std::pow(2.0 * x / 3.0, 2));
      } else {
        psi = std::exp(std::complex<double>(0.0, 8.0 * x)) * sech(x + 5.0) +
              1.5 * std::exp(std::complex<double>(0.0, -7.0 * x)) * sech(1.5 * (x - 5.0));
      }
      f.p[n] = psi.real();
      f.q[n] = psi.imag();
    }
    return f;
  }
  if (name == "ch_cosine" || name == "ch_kink") {
    CHField f;
    f.grid = grid;
    f.u.resize(N);
    for (int n = 0; n < N; ++n) {
      const double x = grid.node(n);
      f.u[n] = (name == "ch_cosine") ? 0.2 + 0.1 * std::cos(3.0 * x) : std::exp(-std::abs(x));
    }
    return f;
  }
  throw std::invalid_argument("ic_library: unknown initial condition '" + name + "'");
}

/// Lifts (p, q) to the 4-component NLS state [p, q, v, w] with v, w the
/// backward differences that the mixed box scheme propagates invariantly.
inline StateField lift_nls_state(const ComplexField& field) {
  StateField z;
  z.grid = field.grid;
  z.t = field.t;
  z.values.resize(field.grid.n_nodes, 4);
  const VectorXd v = diff_backward(field.p, field.grid);
  const VectorXd w = diff_backward(field.q, field.grid);
  z.values.col(0) = field.p;
  z.values.col(1) = field.q;
  z.values.col(2) = v;
  z.values.col(3) = w;
  return z;
}

inline ComplexField project_nls_state(const StateField& z) {
  ComplexField f;
  f.grid = z.grid;
  f.t = z.t;
  f.p = z.values.col(0);
  f.q = z.values.col(1);
  return f;
}

}  // namespace expms
