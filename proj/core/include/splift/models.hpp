#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "splift/types.hpp"

namespace splift {

enum class Boundary { DirichletZero, Periodic };

/// Uniform tensor-product grid in one or two dimensions.
///
/// Dirichlet grids store interior nodes only (h = L / (n + 1), first node at
/// a + h). Periodic grids store one period (h = L / n, first node at a).
/// Two-dimensional nodes are ordered with x running fastest:
/// node(ix, iy) = ix + nx * iy.
struct SpatialGrid {
  int dim = 1;
  Index nx = 0;
  Index ny = 1;
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  Boundary boundary = Boundary::Periodic;
  double hx = 0.0;
  double hy = 0.0;

  static SpatialGrid line(Index nx, double x_min, double x_max, Boundary boundary);
  static SpatialGrid rectangle(Index nx, Index ny, double x_min, double x_max, double y_min,
                               double y_max, Boundary boundary);

  Index size() const { return nx * ny; }
  Index node(Index ix, Index iy) const { return ix + nx * iy; }
  double x(Index ix) const;
  double y(Index iy) const;
};

/// Second-order central-difference Laplacian, assembled symmetrically.
SparseMatrix build_laplacian(const SpatialGrid& grid);

enum class ModelKind { SineGordon, Exponential, KleinGordon, KleinGordonZakharov };

std::string_view to_string(ModelKind kind);

/// Scalar potential density g and its derivatives. For Klein-Gordon the
/// parameter mu is folded in, g(q) = mu q^4 / 4.
struct Nonlinearity {
  ModelKind kind = ModelKind::SineGordon;
  double mu = 1.0;

  double g(double q) const;
  double dg(double q) const;   // f_non
  double d2g(double q) const;
};

/// Canonical wave model  q' = p,  p' = D q - g'(q).
struct FomModel {
  ModelKind kind = ModelKind::SineGordon;
  SpatialGrid grid;
  SparseMatrix laplacian;
  Nonlinearity nonlinearity;

  Index size() const { return grid.size(); }
};

FomModel make_wave_model(ModelKind kind, const SpatialGrid& grid, double mu = 1.0);

struct FomState {
  Vector q;
  Vector p;
  double t = 0.0;
};

/// Stacked representation y = [q; p].
Vector stack(const FomState& state);
FomState unstack(const Vector& y, double t = 0.0);

FomState fom_rhs(const FomModel& model, const FomState& state);
Vector fom_rhs(const FomModel& model, const Vector& y);
/// Jacobian of the stacked vector field, [[0, I], [D - diag(g''(q)), 0]].
SparseMatrix fom_jacobian(const FomModel& model, const Vector& y);

double fom_energy(const FomModel& model, const FomState& state);
double fom_energy(const FomModel& model, const Vector& y);

/// Klein-Gordon-Zakharov state; psi = q1 + i q2 is never stored complex.
struct KgzState {
  Vector q1, q2, p1, p2, varphi, phi;
  double t = 0.0;

  Index size() const { return q1.size(); }
};

/// Stacked order [q1; q2; p1; p2; varphi; phi].
Vector stack(const KgzState& state);
KgzState unstack_kgz(const Vector& y, double t = 0.0);

KgzState kgz_rhs(const KgzState& state, const SparseMatrix& laplacian);
Vector kgz_rhs(const Vector& y, const SparseMatrix& laplacian);
SparseMatrix kgz_jacobian(const Vector& y, const SparseMatrix& laplacian);
double kgz_energy(const KgzState& state, const SparseMatrix& laplacian);
double kgz_energy(const Vector& y, const SparseMatrix& laplacian);

/// Model identifiers used by configs and the CLI:
///   sine-gordon-1d, exp-wave, sine-gordon-2d, klein-gordon-2d, kgz-2d
struct ModelSpec {
  std::string id;
  ModelKind kind;
  SpatialGrid grid;
};

/// Default grid and boundary for a model id at the given resolution
/// (nx points per axis; ny = nx for two-dimensional models).
ModelSpec model_spec(std::string_view model_id, Index nx);

FomState wave_initial_condition(std::string_view model_id, const SpatialGrid& grid);
KgzState kgz_initial_condition(const SpatialGrid& grid);
std::variant<FomState, KgzState> initial_condition(std::string_view model_id,
                                                   const SpatialGrid& grid);

}  // namespace splift
