#pragma once

#include <string>
#include <vector>

#include "splift/models.hpp"

namespace splift {

enum class LiftingVariant {
  EnergyQuadratization,  ///< auxiliary variables chosen so the energy is quadratic
  Standard,              ///< w1 = sin q, w2 = cos q (sine-Gordon only)
};

/// A product u_a (.) u_b of lifted wave-model blocks entering the p equation.
/// Block ids: 0 = q, i >= 1 = w_i.
struct ProductTerm {
  double coefficient = 0.0;
  int a = 0;
  int b = 0;
};

/// Entrywise lifting for the canonical wave models.
///
/// The lifted dynamics are
///   q'   = p
///   p'   = D q + sum_l c_l u_{a_l} (.) u_{b_l} + sum_l d_l w_l
///   w_j' = (alpha_j q + sum_i alpha_{j,i} w_i) (.) p
/// and the lifted energy is
///   1/2 p'p - 1/2 q'Dq + sum_j e_j w_j'w_j + sum_j l_j 1'w_j + c.
struct LiftingMap {
  ModelKind kind = ModelKind::SineGordon;
  LiftingVariant variant = LiftingVariant::EnergyQuadratization;
  int k = 0;                 // number of auxiliary variables
  double kappa = 1.0;        // w1'w1 = kappa^2 sum g(q) (mu excluded for Klein-Gordon)
  double kappa_bar = 1.0;    // f_non = kappa_bar w1 (.) w2, when k >= 2
  double mu = 1.0;

  std::vector<ProductTerm> p_products;
  std::vector<double> p_linear;                 // size k, coefficient of w_j in p'
  std::vector<double> alpha_q;                  // size k
  std::vector<std::vector<double>> alpha_w;     // k x k
  std::vector<double> energy_quadratic;         // size k
  std::vector<double> energy_linear;            // size k
  double energy_constant_per_node = 0.0;

  /// tau_j(q), j in 1..k
  double tau(int j, double q) const;
};

/// Energy-quadratization lifting with the given free parameters.
///   sine-Gordon   w1 = sqrt(2) kappa sin(q/2), w2 = sqrt(2) cos(q/2) / (kappa_bar kappa)
///   exponential   w1 = kappa exp(-q/2)
///   Klein-Gordon  w1 = kappa q^2 / 2
LiftingMap energy_quadratization(ModelKind kind, double kappa, double kappa_bar = 2.0,
                                 double mu = 1.0);
/// Defaults: sine-Gordon (1/sqrt 2, 2), exponential kappa = 1, Klein-Gordon kappa = 2.
LiftingMap default_lifting(ModelKind kind, double mu = 1.0);
/// w1 = sin q, w2 = cos q with energy 1/2 p'p - 1/2 q'Dq + sum(1 - w2).
LiftingMap standard_lifting_sg();

struct QuadraticTerm {
  Index row = 0;
  Index i = 0;  // Kronecker column = i * nbar + j (0-based)
  Index j = 0;
  double value = 0.0;
};

/// y' = A y + B (y (x) y) with B kept as coordinate triples, plus the lifted
/// energy 1/2 y'H y + l'y + c.
struct LiftedModel {
  ModelKind kind = ModelKind::SineGordon;
  LiftingVariant variant = LiftingVariant::EnergyQuadratization;
  Index n = 0;     // grid nodes per block
  Index nbar = 0;  // lifted dimension
  std::vector<std::string> block_labels;

  SparseMatrix linear;
  std::vector<QuadraticTerm> quadratic;

  SparseMatrix energy_hessian;
  Vector energy_linear;
  double energy_constant = 0.0;

  Index block_count() const { return Index(block_labels.size()); }
  Index block_offset(Index block) const { return block * n; }
};

Vector lift_state(const LiftingMap& map, const FomState& state);
/// [q1; q2; p1; p2; varphi; phi; w] with w = q1^2 + q2^2.
Vector lift_state(const KgzState& state);

/// Auxiliary snapshot matrices W_j = tau_j(Q), one per auxiliary variable.
std::vector<Matrix> lift_snapshots(const LiftingMap& map, const Matrix& q_snapshots);
Matrix lift_kgz_snapshots(const Matrix& q1_snapshots, const Matrix& q2_snapshots);

LiftedModel build_lifted_operators(const LiftingMap& map, const SparseMatrix& laplacian);
LiftedModel build_standard_lifting_sg(const SparseMatrix& laplacian);
LiftedModel build_kgz_lifted_operators(const SparseMatrix& laplacian);

Vector lifted_rhs(const LiftedModel& model, const Vector& ybar);
SparseMatrix lifted_jacobian(const LiftedModel& model, const Vector& ybar);
double lifted_energy(const LiftedModel& model, const Vector& ybar);
/// Gradient H y + l of the lifted energy.
Vector lifted_energy_gradient(const LiftedModel& model, const Vector& ybar);

}  // namespace splift
