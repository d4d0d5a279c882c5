#pragma once

#include <string>
#include <vector>

#include "splift/basis.hpp"
#include "splift/lifting.hpp"
#include "splift/models.hpp"

namespace splift {

/// Nonzero (row block, i block, j block) slab of Br. Column s * t_dim + t
/// multiplies y[s0 + s] * y[t0 + t].
struct QuadraticBlock {
  Index row0 = 0, rows = 0;
  Index s0 = 0, s_dim = 0;
  Index t0 = 0, t_dim = 0;
  Matrix coeffs;
};

/// y' = Ar y + Br (y (x) y), with reduced energy 1/2 y'H y + l'y + c.
/// Br is the mode-1 matricization, column s * dim + t multiplies y_s y_t.
struct QuadraticRom {
  Matrix Ar;
  Matrix Br;
  Matrix energy_hessian;
  Vector energy_linear;
  double energy_constant = 0.0;
  std::vector<std::string> block_labels;
  std::vector<Index> block_dims;
  std::vector<QuadraticBlock> br_blocks;  // block-sparse view of Br for evaluation

  Index dim() const { return Ar.rows(); }
  Index block_offset(Index block) const;
};

/// V' A V as a dense matrix.
Matrix project_linear(const SparseMatrix& a, const BlockDiagonalBasis& basis);

/// V' B (V (x) V) via successive mode-1, mode-2 and mode-3 contractions over
/// the nonzero triples. Never forms V (x) V.
Matrix project_quadratic_sparse(const std::vector<QuadraticTerm>& b, Index nbar,
                                const BlockDiagonalBasis& basis);

/// Splits Br along the basis blocks and keeps the nonzero slabs.
std::vector<QuadraticBlock> compress_quadratic(const Matrix& br, const std::vector<Index>& block_dims);
Vector apply_quadratic(const std::vector<QuadraticBlock>& blocks, const Vector& y);
/// Accumulates scale * (Br (I (x) y) + Br (y (x) I)) into jac.
void add_quadratic_jacobian(const std::vector<QuadraticBlock>& blocks, const Vector& y, double scale,
                            Matrix& jac);

QuadraticRom build_quadratic_rom(const LiftedModel& model, const BlockDiagonalBasis& basis);

Vector rom_rhs(const QuadraticRom& rom, const Vector& y);
/// Ar + Br (I (x) y) + Br (y (x) I).
Matrix rom_jacobian(const QuadraticRom& rom, const Vector& y);
/// Br (I (x) y) + Br (y (x) I) without the linear part.
Matrix quadratic_jacobian(const Matrix& br, const Vector& y);

double reduced_lifted_energy(const QuadraticRom& rom, const Vector& y);
Vector reduced_energy_gradient(const QuadraticRom& rom, const Vector& y);
/// d/dt of the reduced lifted energy along the ROM vector field.
double energy_rate_residual(const QuadraticRom& rom, const Vector& y);

/// Cotangent-lift Galerkin ROM of a canonical wave model, y = [q; p] in R^{2r}.
struct HamiltonianRom {
  const FomModel* model = nullptr;
  Matrix phi;
  Matrix d_hat;

  Index r() const { return phi.cols(); }
  Index dim() const { return 2 * phi.cols(); }
};

HamiltonianRom build_psd_rom(const FomModel& model, const Matrix& phi);
Vector psd_rhs(const HamiltonianRom& rom, const Vector& y);
Matrix psd_jacobian(const HamiltonianRom& rom, const Vector& y);
double psd_hamiltonian(const HamiltonianRom& rom, const Vector& y);

/// Galerkin ROM of the KGZ system without lifting: Phi for q1, q2, p1, p2
/// and V for varphi, phi. State [q1; q2; p1; p2; varphi; phi] in R^{6r}.
struct KgzGalerkinRom {
  Matrix phi;
  Matrix v;
  Matrix d1;  // Phi' D Phi
  Matrix d2;  // V' D V

  Index r_phi() const { return phi.cols(); }
  Index r_v() const { return v.cols(); }
  Index dim() const { return 4 * phi.cols() + 2 * v.cols(); }
};

KgzGalerkinRom build_kgz_galerkin_rom(const SparseMatrix& laplacian, const Matrix& phi,
                                      const Matrix& v);
Vector kgz_galerkin_rhs(const KgzGalerkinRom& rom, const Vector& y);
/// Full KGZ state reconstructed from a reduced state.
Vector kgz_galerkin_expand(const KgzGalerkinRom& rom, const Vector& y);

}  // namespace splift
