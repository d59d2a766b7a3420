#pragma once

#include <stdexcept>

#include <Eigen/Core>

namespace expms {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Boundary { periodic, antiperiodic };

/// Uniform 1-D grid with n_nodes nodes x_n = x_min + n dx, dx = (x_max - x_min)/n_nodes.
/// The right endpoint is identified with node 0 (up to the boundary sign).
struct Grid1D {
  int n_nodes = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  Boundary boundary = Boundary::periodic;

  double dx() const { return (x_max - x_min) / n_nodes; }
  double node(int n) const { return x_min + n * dx(); }
};

struct WrapResult {
  int index;
  double sign;
};

/// Maps an out-of-range node index back into [0, n_nodes); each wrap flips
/// the sign for anti-periodic boundaries.
inline WrapResult wrap_index(const Grid1D& grid, int n) {
  const int N = grid.n_nodes;
  double sign = 1.0;
  while (n < 0) {
    n += N;
    if (grid.boundary == Boundary::antiperiodic) sign = -sign;
  }
  while (n >= N) {
    n -= N;
    if (grid.boundary == Boundary::antiperiodic) sign = -sign;
  }
  return {n, sign};
}

inline double at(const VectorXd& v, const Grid1D& grid, int n) {
  const WrapResult w = wrap_index(grid, n);
  return w.sign * v[w.index];
}

inline VectorXd row_at(const MatrixXd& values, const Grid1D& grid, int n) {
  const WrapResult w = wrap_index(grid, n);
  return w.sign * values.row(w.index).transpose();
}

/// Forward difference (v_{n+1} - v_n)/dx, one value per node/cell.
inline VectorXd diff_forward(const VectorXd& v, const Grid1D& grid) {
  const int N = grid.n_nodes;
  const double dx = grid.dx();
  VectorXd out(N);
  for (int n = 0; n < N; ++n) out[n] = (at(v, grid, n + 1) - v[n]) / dx;
  return out;
}

inline MatrixXd diff_forward(const MatrixXd& values, const Grid1D& grid) {
  const int N = grid.n_nodes;
  const double dx = grid.dx();
  MatrixXd out(N, values.cols());
  for (int n = 0; n < N; ++n) {
    const WrapResult w = wrap_index(grid, n + 1);
    out.row(n) = (w.sign * values.row(w.index) - values.row(n)) / dx;
  }
  return out;
}

/// Backward difference (v_n - v_{n-1})/dx.
inline VectorXd diff_backward(const VectorXd& v, const Grid1D& grid) {
  const int N = grid.n_nodes;
  const double dx = grid.dx();
  VectorXd out(N);
  for (int n = 0; n < N; ++n) out[n] = (v[n] - at(v, grid, n - 1)) / dx;
  return out;
}

inline MatrixXd diff_backward(const MatrixXd& values, const Grid1D& grid) {
  const int N = grid.n_nodes;
  const double dx = grid.dx();
  MatrixXd out(N, values.cols());
  for (int n = 0; n < N; ++n) {
    const WrapResult w = wrap_index(grid, n - 1);
    out.row(n) = (values.row(n) - w.sign * values.row(w.index)) / dx;
  }
  return out;
}

/// Second difference (v_{n+1} - 2 v_n + v_{n-1})/dx^2 on the raw array.
inline VectorXd diff_second(const VectorXd& v, const Grid1D& grid) {
  const int N = grid.n_nodes;
  const double dx2 = grid.dx() * grid.dx();
  VectorXd out(N);
  for (int n = 0; n < N; ++n) {
    out[n] = ((at(v, grid, n + 1) - v[n]) - (v[n] - at(v, grid, n - 1))) / dx2;
  }
  return out;
}

/// Cell average (v_n + v_{n+1})/2, one value per cell n.
inline VectorXd avg_forward(const VectorXd& v, const Grid1D& grid) {
  const int N = grid.n_nodes;
  VectorXd out(N);
  for (int n = 0; n < N; ++n) out[n] = 0.5 * (v[n] + at(v, grid, n + 1));
  return out;
}

inline MatrixXd avg_forward(const MatrixXd& values, const Grid1D& grid) {
  const int N = grid.n_nodes;
  MatrixXd out(N, values.cols());
  for (int n = 0; n < N; ++n) {
    const WrapResult w = wrap_index(grid, n + 1);
    out.row(n) = 0.5 * (values.row(n) + w.sign * values.row(w.index));
  }
  return out;
}

/// Discrete solution of a d-component system: one row per grid node.
struct StateField {
  Grid1D grid;
  MatrixXd values;  ///< n_nodes x dim
  double t = 0.0;

  int dim() const { return static_cast<int>(values.cols()); }
};

}  // namespace expms
