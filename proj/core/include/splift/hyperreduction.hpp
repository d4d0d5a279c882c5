#pragma once

#include <vector>

#include <Eigen/LU>

#include "splift/models.hpp"
#include "splift/rom.hpp"

namespace splift {

/// Hyper-reduced Hamiltonian ROM. Only the m sampled rows of Phi are kept,
/// so online evaluation never touches a length-n vector.
struct DeimModel {
  Matrix basis;                 // V_DEIM, n x m (offline only)
  std::vector<Index> indices;   // 0-based sampled grid nodes
  Matrix phi_rows;              // P' Phi, m x r
  Eigen::PartialPivLU<Matrix> interpolation;  // P' V_DEIM
  Vector weights;               // (P' V_DEIM)^{-T} V_DEIM' 1
  double condition = 0.0;       // 2-norm condition number of P' V_DEIM
  Matrix d_hat;                 // Phi' D Phi
  Nonlinearity nonlinearity;

  Index m() const { return Index(indices.size()); }
  Index r() const { return phi_rows.cols(); }
  Index dim() const { return 2 * phi_rows.cols(); }
};

/// [diag(g'(Phi q_1)) Phi, ..., diag(g'(Phi q_K)) Phi], n x (r K).
Matrix collect_jacobian_snapshots(const Nonlinearity& nonlinearity, const Matrix& phi,
                                  const Matrix& reduced_q);

/// Greedy DEIM interpolation indices (0-based), lowest index wins ties.
std::vector<Index> deim_points(const Matrix& deim_basis);

/// DEIM model from an explicit V_DEIM.
DeimModel build_deim_model(const HamiltonianRom& psd, const Matrix& deim_basis);
/// V_DEIM = truncated_svd(jacobian_snapshots, m).
DeimModel build_spdeim(const HamiltonianRom& psd, const Matrix& jacobian_snapshots, Index m);

Vector spdeim_rhs(const DeimModel& deim, const Vector& y);
Matrix spdeim_jacobian(const DeimModel& deim, const Vector& y);
double spdeim_hamiltonian(const DeimModel& deim, const Vector& y);

}  // namespace splift
