#include "splift/hyperreduction.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace splift {

Matrix collect_jacobian_snapshots(const Nonlinearity& nonlinearity, const Matrix& phi,
                                  const Matrix& reduced_q) {
  require(reduced_q.rows() == phi.cols(), "collect_jacobian_snapshots: reduced dimension mismatch");
  const Index n = phi.rows(), r = phi.cols(), k = reduced_q.cols();
  Matrix out(n, r * k);
  Vector slope(n);
  for (Index c = 0; c < k; ++c) {
    const Vector q = phi * reduced_q.col(c);
    for (Index i = 0; i < n; ++i) slope[i] = nonlinearity.dg(q[i]);
    out.middleCols(c * r, r) = slope.asDiagonal() * phi;
  }
  return out;
}

namespace {

Index argmax_abs(const Vector& v) {
  Index best = 0;
  double best_value = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best_value) {
      best_value = a;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::vector<Index> deim_points(const Matrix& u) {
  const Index m = u.cols();
  require(m >= 1 && m <= u.rows(), "deim_points: need 1 <= m <= n columns");
  std::vector<Index> indices;
  indices.push_back(argmax_abs(u.col(0)));
  const double scale = u.cwiseAbs().maxCoeff();
  for (Index l = 1; l < m; ++l) {
    Matrix pu(l, l);
    Vector pv(l);
    for (Index a = 0; a < l; ++a) {
      pu.row(a) = u.row(indices[std::size_t(a)]).head(l);
      pv[a] = u(indices[std::size_t(a)], l);
    }
    Eigen::FullPivLU<Matrix> lu(pu);
    if (!lu.isInvertible()) {
      throw NumericalError("deim_points: singular interpolation matrix at step " + std::to_string(l));
    }
    const Vector residual = u.col(l) - u.leftCols(l) * lu.solve(pv);
    const Index next = argmax_abs(residual);
    if (std::abs(residual[next]) <= 1e-14 * scale) {
      throw NumericalError("deim_points: rank-deficient basis at step " + std::to_string(l));
    }
    indices.push_back(next);
  }
  return indices;
}

DeimModel build_deim_model(const HamiltonianRom& psd, const Matrix& deim_basis) {
  require(psd.model != nullptr, "build_deim_model: PSD ROM without model");
  require(deim_basis.rows() == psd.phi.rows(), "build_deim_model: DEIM basis row count mismatch");
  DeimModel deim;
  deim.basis = deim_basis;
  deim.indices = deim_points(deim_basis);
  const Index m = deim.m();
  Matrix pv(m, m);
  deim.phi_rows.resize(m, psd.r());
  for (Index a = 0; a < m; ++a) {
    pv.row(a) = deim_basis.row(deim.indices[std::size_t(a)]);
    deim.phi_rows.row(a) = psd.phi.row(deim.indices[std::size_t(a)]);
  }
  Eigen::JacobiSVD<Matrix> svd(pv);
  const Vector s = svd.singularValues();
  if (s[m - 1] == 0.0) throw NumericalError("build_deim_model: singular interpolation factor");
  deim.condition = s[0] / s[m - 1];
  deim.interpolation.compute(pv);
  const Vector column_sums = deim_basis.colwise().sum().transpose();
  deim.weights = deim.interpolation.transpose().solve(column_sums);
  deim.d_hat = psd.d_hat;
  deim.nonlinearity = psd.model->nonlinearity;
  return deim;
}

DeimModel build_spdeim(const HamiltonianRom& psd, const Matrix& jacobian_snapshots, Index m) {
  return build_deim_model(psd, truncated_svd(jacobian_snapshots, m).vectors);
}

Vector spdeim_rhs(const DeimModel& deim, const Vector& y) {
  const Index r = deim.r();
  require_size(y.size(), 2 * r, "spdeim_rhs");
  const Vector qs = deim.phi_rows * y.head(r);
  Vector sampled(qs.size());
  for (Index a = 0; a < qs.size(); ++a) sampled[a] = deim.weights[a] * deim.nonlinearity.dg(qs[a]);
  Vector out(2 * r);
  out.head(r) = y.tail(r);
  out.tail(r).noalias() = deim.d_hat * y.head(r);
  out.tail(r).noalias() -= deim.phi_rows.transpose() * sampled;
  return out;
}

Matrix spdeim_jacobian(const DeimModel& deim, const Vector& y) {
  const Index r = deim.r();
  require_size(y.size(), 2 * r, "spdeim_jacobian");
  const Vector qs = deim.phi_rows * y.head(r);
  Vector curv(qs.size());
  for (Index a = 0; a < qs.size(); ++a) curv[a] = deim.weights[a] * deim.nonlinearity.d2g(qs[a]);
  Matrix j = Matrix::Zero(2 * r, 2 * r);
  j.topRightCorner(r, r).setIdentity();
  j.bottomLeftCorner(r, r) = deim.d_hat;
  j.bottomLeftCorner(r, r).noalias() -= deim.phi_rows.transpose() * curv.asDiagonal() * deim.phi_rows;
  return j;
}

double spdeim_hamiltonian(const DeimModel& deim, const Vector& y) {
  const Index r = deim.r();
  require_size(y.size(), 2 * r, "spdeim_hamiltonian");
  const Vector qs = deim.phi_rows * y.head(r);
  double potential = 0.0;
  for (Index a = 0; a < qs.size(); ++a) potential += deim.weights[a] * deim.nonlinearity.g(qs[a]);
  const auto qh = y.head(r);
  const auto ph = y.tail(r);
  return 0.5 * ph.squaredNorm() - 0.5 * qh.dot(deim.d_hat * qh) + potential;
}

}  // namespace splift
