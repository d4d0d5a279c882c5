#pragma once

#include <cmath>
#include <random>

#include "splift/types.hpp"

namespace testing {

using splift::Index;
using splift::Matrix;
using splift::Vector;

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(20240611);
  return engine;
}

inline Matrix random_matrix(Index rows, Index cols, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = u(rng());
  return m;
}

inline Vector random_vector(Index n, double scale = 1.0) { return random_matrix(n, 1, scale).col(0); }

/// Orthonormal columns from a Householder QR of a random matrix.
inline Matrix random_orthonormal(Index rows, Index cols) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rows, cols));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return max_abs_diff(a, b) / scale;
}

/// Dense second-order Laplacian built node by node, independent of the library.
inline Matrix dense_laplacian_1d(Index n, double h, bool periodic) {
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = -2.0 / (h * h);
    if (i > 0) d(i, i - 1) = 1.0 / (h * h);
    if (i + 1 < n) d(i, i + 1) = 1.0 / (h * h);
  }
  if (periodic) {
    d(0, n - 1) += 1.0 / (h * h);
    d(n - 1, 0) += 1.0 / (h * h);
  }
  return d;
}

inline Matrix dense_laplacian_2d_periodic(Index nx, Index ny, double hx, double hy) {
  const Index n = nx * ny;
  Matrix d = Matrix::Zero(n, n);
  for (Index iy = 0; iy < ny; ++iy) {
    for (Index ix = 0; ix < nx; ++ix) {
      const Index k = ix + nx * iy;
      d(k, k) += -2.0 / (hx * hx) - 2.0 / (hy * hy);
      d(k, (ix + 1) % nx + nx * iy) += 1.0 / (hx * hx);
      d(k, (ix + nx - 1) % nx + nx * iy) += 1.0 / (hx * hx);
      d(k, ix + nx * ((iy + 1) % ny)) += 1.0 / (hy * hy);
      d(k, ix + nx * ((iy + ny - 1) % ny)) += 1.0 / (hy * hy);
    }
  }
  return d;
}

/// Central-difference gradient of a scalar function.
template <class F>
Vector fd_gradient(F&& f, const Vector& x, double eps = 1e-6) {
  Vector g(x.size());
  Vector xp = x, xm = x;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + eps;
    xm[i] = x[i] - eps;
    g[i] = (f(xp) - f(xm)) / (2.0 * eps);
    xp[i] = xm[i] = x[i];
  }
  return g;
}

/// Canonical symplectic matrix [[0, I], [-I, 0]] of size 2r.
inline Matrix canonical_j(Index r) {
  Matrix j = Matrix::Zero(2 * r, 2 * r);
  j.topRightCorner(r, r).setIdentity();
  j.bottomLeftCorner(r, r) = -Matrix::Identity(r, r);
  return j;
}

}  // namespace testing
