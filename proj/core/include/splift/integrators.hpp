#pragma once

#include <functional>
#include <vector>

#include "splift/rom.hpp"

namespace splift {

enum class SolverKind { Newton, Picard };

struct IntegratorConfig {
  double dt = 0.01;
  double horizon = 1.0;
  double tolerance = 1e-12;   // step residual: inf-norm <= tol * (1 + |y|_inf)
  int max_iterations = 0;     // 0 picks 50 (Newton) or 200 (Picard)
  SolverKind solver = SolverKind::Newton;
  Index stride = 1;           // keep every stride-th step in the trajectory

  Index steps() const;
  int iteration_limit() const;
  void validate() const;
};

/// A time-marching failure; carries the step that could not be completed.
class StepFailure : public NumericalError {
 public:
  StepFailure(const std::string& what, Index step) : NumericalError(what), step_(step) {}
  Index step() const { return step_; }

 private:
  Index step_;
};

/// An autonomous vector field with optional analytic Jacobians. Without a
/// Jacobian Newton falls back to forward differences.
struct OdeSystem {
  std::function<Vector(const Vector&)> rhs;
  std::function<Matrix(const Vector&)> dense_jacobian;
  std::function<SparseMatrix(const Vector&)> sparse_jacobian;
};

struct Trajectory {
  std::vector<double> times;
  Matrix states;  // one column per kept sample
  Index steps = 0;
  Index iterations = 0;  // nonlinear iterations summed over all steps
};

/// Called after every step (including step 0) with the current state.
using StepObserver = std::function<void(Index step, double t, const Vector& y)>;

/// One implicit-midpoint step (y1 - y0)/dt = f((y0 + y1)/2).
Vector midpoint_step(const OdeSystem& system, const Vector& y0, double dt,
                     const IntegratorConfig& config, Index step_index = 0,
                     Index* iterations = nullptr);

Trajectory implicit_midpoint(const OdeSystem& system, const Vector& y0,
                             const IntegratorConfig& config, double t0 = 0.0,
                             const StepObserver& observer = {});

/// One Kahan step for y' = Ar y + Br (y (x) y): a single linear solve.
Vector kahan_step(const Matrix& ar, const Matrix& br, const Vector& y, double dt,
                  Index step_index = 0);

Trajectory kahan(const Matrix& ar, const Matrix& br, const Vector& y0,
                 const IntegratorConfig& config, double t0 = 0.0,
                 const StepObserver& observer = {});

/// Kahan steps that evaluate Br through its block-sparse slabs.
Vector kahan_step(const QuadraticRom& rom, const Vector& y, double dt, Index step_index = 0);
Trajectory kahan(const QuadraticRom& rom, const Vector& y0, const IntegratorConfig& config,
                 double t0 = 0.0, const StepObserver& observer = {});

/// Forward-difference Jacobian with step sqrt(eps) * max(1, |y_i|).
Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& y);

}  // namespace splift
