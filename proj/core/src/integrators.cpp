#include "splift/integrators.hpp"

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <sstream>

namespace splift {

Index IntegratorConfig::steps() const {
  return Index(std::llround(horizon / dt));
}

int IntegratorConfig::iteration_limit() const {
  if (max_iterations > 0) return max_iterations;
  return solver == SolverKind::Newton ? 50 : 200;
}

void IntegratorConfig::validate() const {
  require(std::isfinite(dt) && dt != 0.0, "IntegratorConfig: dt must be nonzero and finite");
  require(std::isfinite(horizon) && horizon * dt >= 0.0,
          "IntegratorConfig: horizon must have the sign of dt");
  require(tolerance > 0.0, "IntegratorConfig: tolerance must be positive");
  require(stride >= 1, "IntegratorConfig: stride must be at least 1");
  const double ratio = horizon / dt;
  require(std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, std::abs(ratio)),
          "IntegratorConfig: horizon is not a whole number of steps");
}

Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& y) {
  const Vector f0 = f(y);
  Matrix j(f0.size(), y.size());
  Vector yp = y;
  const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  for (Index k = 0; k < y.size(); ++k) {
    const double h = root_eps * std::max(1.0, std::abs(y[k]));
    yp[k] = y[k] + h;
    j.col(k) = (f(yp) - f0) / h;
    yp[k] = y[k];
  }
  return j;
}

namespace {

std::string step_message(const char* what, Index step, double residual) {
  std::ostringstream os;
  os << what << " at step " << step << " (residual " << residual << ")";
  return os.str();
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace

Vector midpoint_step(const OdeSystem& system, const Vector& y0, double dt,
                     const IntegratorConfig& config, Index step_index, Index* iterations) {
  require(bool(system.rhs), "midpoint_step: missing vector field");
  const double eps = std::numeric_limits<double>::epsilon();
  const int limit = config.iteration_limit();
  Vector y1 = y0 + dt * system.rhs(y0);
  double residual_norm = 0.0;

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<Index>> sparse_lu;
  bool pattern_ready = false;

  for (int it = 0; it <= limit; ++it) {
    const Vector mid = 0.5 * (y0 + y1);
    const Vector f = system.rhs(mid);
    const Vector residual = y1 - y0 - dt * f;
    residual_norm = inf_norm(residual);
    const double scale = 1.0 + inf_norm(y1);
    if (!std::isfinite(residual_norm)) {
      throw StepFailure(step_message("midpoint: non-finite residual", step_index, residual_norm),
                        step_index);
    }
    if (iterations) ++*iterations;
    if (residual_norm <= config.tolerance * scale) return y1;
    if (it == limit) break;

    if (config.solver == SolverKind::Picard) {
      y1 = y0 + dt * f;
      if (residual_norm > 1e12 * scale) {
        throw StepFailure(step_message("midpoint: Picard iteration diverged", step_index, residual_norm),
                          step_index);
      }
      continue;
    }

    Vector delta;
    if (system.sparse_jacobian) {
      SparseMatrix m = -0.5 * dt * system.sparse_jacobian(mid);
      for (Index i = 0; i < m.rows(); ++i) m.coeffRef(i, i) += 1.0;
      m.makeCompressed();
      if (!pattern_ready) {
        sparse_lu.analyzePattern(m);
        pattern_ready = true;
      }
      sparse_lu.factorize(m);
      if (sparse_lu.info() != Eigen::Success) {
        throw StepFailure(step_message("midpoint: singular Newton matrix", step_index, residual_norm),
                          step_index);
      }
      delta = sparse_lu.solve(-residual);
    } else {
      const Matrix jac = system.dense_jacobian ? system.dense_jacobian(mid)
                                               : finite_difference_jacobian(system.rhs, mid);
      Matrix m = -0.5 * dt * jac;
      m.diagonal().array() += 1.0;
      Eigen::PartialPivLU<Matrix> lu(m);
      delta = lu.solve(-residual);
    }
    y1 += delta;
    // An update at rounding level means the residual cannot shrink further.
    if (inf_norm(delta) <= 4.0 * eps * (1.0 + inf_norm(y1))) {
      const Vector r2 = y1 - y0 - dt * system.rhs(0.5 * (y0 + y1));
      if (inf_norm(r2) <= 1e3 * config.tolerance * (1.0 + inf_norm(y1))) return y1;
    }
  }
  throw StepFailure(step_message("midpoint: nonlinear solve did not converge", step_index, residual_norm),
                    step_index);
}

namespace {

template <class Step>
Trajectory march(const Vector& y0, const IntegratorConfig& config, double t0,
                 const StepObserver& observer, Step&& step) {
  config.validate();
  require(y0.allFinite(), "integrator: non-finite initial state");
  const Index steps = config.steps();
  const Index samples = steps / config.stride + 1;
  Trajectory traj;
  traj.steps = steps;
  traj.states.resize(y0.size(), samples);
  traj.times.reserve(std::size_t(samples));
  traj.states.col(0) = y0;
  traj.times.push_back(t0);
  if (observer) observer(0, t0, y0);
  Vector y = y0;
  Index kept = 1;
  for (Index k = 1; k <= steps; ++k) {
    y = step(y, k);
    const double t = t0 + double(k) * config.dt;
    if (observer) observer(k, t, y);
    if (k % config.stride == 0) {
      traj.states.col(kept++) = y;
      traj.times.push_back(t);
    }
  }
  return traj;
}

}  // namespace

Trajectory implicit_midpoint(const OdeSystem& system, const Vector& y0,
                             const IntegratorConfig& config, double t0,
                             const StepObserver& observer) {
  Index iterations = 0;
  Trajectory traj = march(y0, config, t0, observer, [&](const Vector& y, Index k) {
    return midpoint_step(system, y, config.dt, config, k, &iterations);
  });
  traj.iterations = iterations;
  return traj;
}

namespace {

// Solves M y1 = y/dt + Ar y/2 for the assembled step matrix M.
Vector kahan_solve(Matrix& m, const Matrix& ar, const Vector& y, double dt, Index step_index) {
  m.diagonal().array() += 1.0 / dt;
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "kahan: singular step matrix at step " << step_index << " (rcond " << rcond
       << "); try a smaller dt than " << dt;
    throw StepFailure(os.str(), step_index);
  }
  Vector rhs = y / dt;
  rhs.noalias() += 0.5 * (ar * y);
  Vector next = lu.solve(rhs);
  if (!next.allFinite()) throw StepFailure("kahan: non-finite state at step " + std::to_string(step_index), step_index);
  return next;
}

}  // namespace

Vector kahan_step(const Matrix& ar, const Matrix& br, const Vector& y, double dt, Index step_index) {
  const Index r = y.size();
  require(ar.rows() == r && ar.cols() == r, "kahan_step: Ar size mismatch");
  require(br.rows() == r && br.cols() == r * r, "kahan_step: Br size mismatch");
  // M = I/dt - Ar/2 - (Br (I (x) y) + Br (y (x) I)) / 2
  Matrix m = -0.5 * ar;
  for (Index s = 0; s < r; ++s) {
    const auto ms = br.middleCols(s * r, r);
    m.col(s).noalias() -= 0.5 * (ms * y);
    m.noalias() -= (0.5 * y[s]) * ms;
  }
  return kahan_solve(m, ar, y, dt, step_index);
}

Vector kahan_step(const QuadraticRom& rom, const Vector& y, double dt, Index step_index) {
  require_size(y.size(), rom.dim(), "kahan_step");
  if (rom.br_blocks.empty() && rom.Br.size() != 0) return kahan_step(rom.Ar, rom.Br, y, dt, step_index);
  Matrix m = -0.5 * rom.Ar;
  add_quadratic_jacobian(rom.br_blocks, y, -0.5, m);
  return kahan_solve(m, rom.Ar, y, dt, step_index);
}

Trajectory kahan(const QuadraticRom& rom, const Vector& y0, const IntegratorConfig& config, double t0,
                 const StepObserver& observer) {
  return march(y0, config, t0, observer,
               [&](const Vector& y, Index k) { return kahan_step(rom, y, config.dt, k); });
}

Trajectory kahan(const Matrix& ar, const Matrix& br, const Vector& y0,
                 const IntegratorConfig& config, double t0, const StepObserver& observer) {
  return march(y0, config, t0, observer,
               [&](const Vector& y, Index k) { return kahan_step(ar, br, y, config.dt, k); });
}

}  // namespace splift
