#include "splift/models.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace splift {

SpatialGrid SpatialGrid::line(Index nx, double x_min, double x_max, Boundary boundary) {
  require(nx >= 3, "SpatialGrid: need at least 3 points per axis");
  require(x_max > x_min, "SpatialGrid: domain length must be positive");
  SpatialGrid grid;
  grid.dim = 1;
  grid.nx = nx;
  grid.ny = 1;
  grid.x_min = x_min;
  grid.x_max = x_max;
  grid.y_min = 0.0;
  grid.y_max = 0.0;
  grid.boundary = boundary;
  const double length = x_max - x_min;
  grid.hx = boundary == Boundary::Periodic ? length / double(nx) : length / double(nx + 1);
  grid.hy = 0.0;
  return grid;
}

SpatialGrid SpatialGrid::rectangle(Index nx, Index ny, double x_min, double x_max, double y_min,
                                   double y_max, Boundary boundary) {
  require(nx >= 3 && ny >= 3, "SpatialGrid: need at least 3 points per axis");
  require(x_max > x_min && y_max > y_min, "SpatialGrid: domain length must be positive");
  SpatialGrid grid = line(nx, x_min, x_max, boundary);
  grid.dim = 2;
  grid.ny = ny;
  grid.y_min = y_min;
  grid.y_max = y_max;
  const double length = y_max - y_min;
  grid.hy = boundary == Boundary::Periodic ? length / double(ny) : length / double(ny + 1);
  return grid;
}

double SpatialGrid::x(Index ix) const {
  return boundary == Boundary::Periodic ? x_min + double(ix) * hx : x_min + double(ix + 1) * hx;
}

double SpatialGrid::y(Index iy) const {
  if (dim == 1) return 0.0;
  return boundary == Boundary::Periodic ? y_min + double(iy) * hy : y_min + double(iy + 1) * hy;
}

namespace {

// Appends the 1D stencil (1, -2, 1) / h^2 along one axis. Off-diagonal
// couplings are emitted in symmetric pairs so D = D^T holds exactly.
void append_axis(std::vector<Triplet>& entries, const SpatialGrid& grid, bool along_x) {
  const Index count = along_x ? grid.nx : grid.ny;
  const Index lines = along_x ? grid.ny : grid.nx;
  const double h = along_x ? grid.hx : grid.hy;
  const double w = 1.0 / (h * h);
  const bool periodic = grid.boundary == Boundary::Periodic;
  auto index = [&](Index line, Index k) {
    return along_x ? grid.node(k, line) : grid.node(line, k);
  };
  for (Index line = 0; line < lines; ++line) {
    for (Index k = 0; k < count; ++k) {
      entries.emplace_back(index(line, k), index(line, k), -2.0 * w);
      // couple k with its right neighbour once, both orientations
      if (k + 1 < count) {
        entries.emplace_back(index(line, k), index(line, k + 1), w);
        entries.emplace_back(index(line, k + 1), index(line, k), w);
      } else if (periodic) {
        entries.emplace_back(index(line, k), index(line, 0), w);
        entries.emplace_back(index(line, 0), index(line, k), w);
      }
    }
  }
}

}  // namespace

SparseMatrix build_laplacian(const SpatialGrid& grid) {
  require(grid.nx >= 3, "build_laplacian: need at least 3 points per axis");
  require(grid.hx > 0.0, "build_laplacian: non-positive spacing");
  if (grid.dim == 2) {
    require(grid.ny >= 3, "build_laplacian: need at least 3 points per axis");
    require(grid.hy > 0.0, "build_laplacian: non-positive spacing");
  }
  const Index n = grid.size();
  std::vector<Triplet> entries;
  entries.reserve(std::size_t(n) * (grid.dim == 2 ? 10 : 5));
  append_axis(entries, grid, true);
  if (grid.dim == 2) append_axis(entries, grid, false);
  SparseMatrix d(n, n);
  d.setFromTriplets(entries.begin(), entries.end());
  d.makeCompressed();
  return d;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::SineGordon: return "sine-gordon";
    case ModelKind::Exponential: return "exponential";
    case ModelKind::KleinGordon: return "klein-gordon";
    case ModelKind::KleinGordonZakharov: return "kgz";
  }
  return "unknown";
}

double Nonlinearity::g(double q) const {
  switch (kind) {
    case ModelKind::SineGordon: return 1.0 - std::cos(q);
    case ModelKind::Exponential: return std::exp(-q);
    case ModelKind::KleinGordon: return 0.25 * mu * q * q * q * q;
    case ModelKind::KleinGordonZakharov: break;
  }
  throw InvalidArgument("Nonlinearity: KGZ has no scalar potential");
}

double Nonlinearity::dg(double q) const {
  switch (kind) {
    case ModelKind::SineGordon: return std::sin(q);
    case ModelKind::Exponential: return -std::exp(-q);
    case ModelKind::KleinGordon: return mu * q * q * q;
    case ModelKind::KleinGordonZakharov: break;
  }
  throw InvalidArgument("Nonlinearity: KGZ has no scalar potential");
}

double Nonlinearity::d2g(double q) const {
  switch (kind) {
    case ModelKind::SineGordon: return std::cos(q);
    case ModelKind::Exponential: return std::exp(-q);
    case ModelKind::KleinGordon: return 3.0 * mu * q * q;
    case ModelKind::KleinGordonZakharov: break;
  }
  throw InvalidArgument("Nonlinearity: KGZ has no scalar potential");
}

FomModel make_wave_model(ModelKind kind, const SpatialGrid& grid, double mu) {
  require(kind != ModelKind::KleinGordonZakharov,
          "make_wave_model: KGZ is not a canonical wave model");
  FomModel model;
  model.kind = kind;
  model.grid = grid;
  model.laplacian = build_laplacian(grid);
  model.nonlinearity = Nonlinearity{kind, kind == ModelKind::KleinGordon ? mu : 1.0};
  return model;
}

Vector stack(const FomState& state) {
  require_size(state.p.size(), state.q.size(), "stack");
  Vector y(2 * state.q.size());
  y << state.q, state.p;
  return y;
}

FomState unstack(const Vector& y, double t) {
  require(y.size() % 2 == 0, "unstack: odd state length");
  const Index n = y.size() / 2;
  return FomState{y.head(n), y.tail(n), t};
}

FomState fom_rhs(const FomModel& model, const FomState& state) {
  const Index n = model.size();
  require_size(state.q.size(), n, "fom_rhs q");
  require_size(state.p.size(), n, "fom_rhs p");
  FomState out;
  out.t = state.t;
  out.q = state.p;
  out.p = model.laplacian * state.q;
  for (Index i = 0; i < n; ++i) out.p[i] -= model.nonlinearity.dg(state.q[i]);
  return out;
}

Vector fom_rhs(const FomModel& model, const Vector& y) {
  require_size(y.size(), 2 * model.size(), "fom_rhs");
  return stack(fom_rhs(model, unstack(y)));
}

SparseMatrix fom_jacobian(const FomModel& model, const Vector& y) {
  const Index n = model.size();
  require_size(y.size(), 2 * n, "fom_jacobian");
  std::vector<Triplet> entries;
  entries.reserve(std::size_t(model.laplacian.nonZeros() + 2 * n));
  for (Index i = 0; i < n; ++i) entries.emplace_back(i, n + i, 1.0);
  for (Index k = 0; k < model.laplacian.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(model.laplacian, k); it; ++it) {
      entries.emplace_back(n + it.row(), it.col(), it.value());
    }
  }
  for (Index i = 0; i < n; ++i) entries.emplace_back(n + i, i, -model.nonlinearity.d2g(y[i]));
  SparseMatrix jac(2 * n, 2 * n);
  jac.setFromTriplets(entries.begin(), entries.end());
  return jac;
}

double fom_energy(const FomModel& model, const FomState& state) {
  const Index n = model.size();
  require_size(state.q.size(), n, "fom_energy q");
  require_size(state.p.size(), n, "fom_energy p");
  double potential = 0.0;
  for (Index i = 0; i < n; ++i) potential += model.nonlinearity.g(state.q[i]);
  const Vector dq = model.laplacian * state.q;
  return 0.5 * state.p.squaredNorm() - 0.5 * state.q.dot(dq) + potential;
}

double fom_energy(const FomModel& model, const Vector& y) {
  require_size(y.size(), 2 * model.size(), "fom_energy");
  return fom_energy(model, unstack(y));
}

Vector stack(const KgzState& state) {
  const Index n = state.size();
  for (const Vector* block : {&state.q2, &state.p1, &state.p2, &state.varphi, &state.phi}) {
    require_size(block->size(), n, "stack(KgzState)");
  }
  Vector y(6 * n);
  y << state.q1, state.q2, state.p1, state.p2, state.varphi, state.phi;
  return y;
}

KgzState unstack_kgz(const Vector& y, double t) {
  require(y.size() % 6 == 0, "unstack_kgz: length not a multiple of 6");
  const Index n = y.size() / 6;
  return KgzState{y.segment(0, n),     y.segment(n, n),     y.segment(2 * n, n),
                  y.segment(3 * n, n), y.segment(4 * n, n), y.segment(5 * n, n), t};
}

KgzState kgz_rhs(const KgzState& s, const SparseMatrix& laplacian) {
  const Index n = laplacian.rows();
  for (const Vector* block : {&s.q1, &s.q2, &s.p1, &s.p2, &s.varphi, &s.phi}) {
    require_size(block->size(), n, "kgz_rhs");
  }
  const Vector density = s.q1.cwiseAbs2() + s.q2.cwiseAbs2();
  KgzState out;
  out.t = s.t;
  out.q1 = s.p1;
  out.q2 = s.p2;
  out.p1 = laplacian * s.q1 - s.q1 - s.phi.cwiseProduct(s.q1) - density.cwiseProduct(s.q1);
  out.p2 = laplacian * s.q2 - s.q2 - s.phi.cwiseProduct(s.q2) - density.cwiseProduct(s.q2);
  out.varphi = s.phi + density;
  out.phi = laplacian * s.varphi;
  return out;
}

Vector kgz_rhs(const Vector& y, const SparseMatrix& laplacian) {
  require_size(y.size(), 6 * laplacian.rows(), "kgz_rhs");
  return stack(kgz_rhs(unstack_kgz(y), laplacian));
}

SparseMatrix kgz_jacobian(const Vector& y, const SparseMatrix& laplacian) {
  const Index n = laplacian.rows();
  require_size(y.size(), 6 * n, "kgz_jacobian");
  enum : Index { q1 = 0, q2, p1, p2, varphi, phi };
  const auto q1v = y.segment(q1 * n, n), q2v = y.segment(q2 * n, n), phiv = y.segment(phi * n, n);
  std::vector<Triplet> entries;
  entries.reserve(std::size_t(3 * laplacian.nonZeros() + 12 * n));
  auto add_laplacian = [&](Index row_block, Index col_block) {
    for (Index k = 0; k < laplacian.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(laplacian, k); it; ++it) {
        entries.emplace_back(row_block * n + it.row(), col_block * n + it.col(), it.value());
      }
    }
  };
  add_laplacian(p1, q1);
  add_laplacian(p2, q2);
  add_laplacian(phi, varphi);
  for (Index i = 0; i < n; ++i) {
    const double a = q1v[i], b = q2v[i], rho = a * a + b * b;
    entries.emplace_back(q1 * n + i, p1 * n + i, 1.0);
    entries.emplace_back(q2 * n + i, p2 * n + i, 1.0);
    entries.emplace_back(p1 * n + i, q1 * n + i, -1.0 - phiv[i] - rho - 2.0 * a * a);
    entries.emplace_back(p1 * n + i, q2 * n + i, -2.0 * a * b);
    entries.emplace_back(p1 * n + i, phi * n + i, -a);
    entries.emplace_back(p2 * n + i, q2 * n + i, -1.0 - phiv[i] - rho - 2.0 * b * b);
    entries.emplace_back(p2 * n + i, q1 * n + i, -2.0 * a * b);
    entries.emplace_back(p2 * n + i, phi * n + i, -b);
    entries.emplace_back(varphi * n + i, phi * n + i, 1.0);
    entries.emplace_back(varphi * n + i, q1 * n + i, 2.0 * a);
    entries.emplace_back(varphi * n + i, q2 * n + i, 2.0 * b);
  }
  SparseMatrix jac(6 * n, 6 * n);
  jac.setFromTriplets(entries.begin(), entries.end());
  return jac;
}

double kgz_energy(const KgzState& s, const SparseMatrix& laplacian) {
  const Index n = laplacian.rows();
  for (const Vector* block : {&s.q1, &s.q2, &s.p1, &s.p2, &s.varphi, &s.phi}) {
    require_size(block->size(), n, "kgz_energy");
  }
  const Vector density = s.q1.cwiseAbs2() + s.q2.cwiseAbs2();
  return s.p1.squaredNorm() + s.p2.squaredNorm() + s.q1.squaredNorm() + s.q2.squaredNorm() -
         s.q1.dot(laplacian * s.q1) - s.q2.dot(laplacian * s.q2) + s.phi.dot(density) -
         0.5 * s.varphi.dot(laplacian * s.varphi) + 0.5 * s.phi.squaredNorm() +
         0.5 * density.squaredNorm();
}

double kgz_energy(const Vector& y, const SparseMatrix& laplacian) {
  require_size(y.size(), 6 * laplacian.rows(), "kgz_energy");
  return kgz_energy(unstack_kgz(y), laplacian);
}

ModelSpec model_spec(std::string_view id, Index nx) {
  constexpr double pi = std::numbers::pi;
  if (id == "sine-gordon-1d") {
    return {std::string(id), ModelKind::SineGordon,
            SpatialGrid::line(nx, -10.0, 10.0, Boundary::Periodic)};
  }
  if (id == "exp-wave") {
    return {std::string(id), ModelKind::Exponential,
            SpatialGrid::line(nx, 0.0, pi, Boundary::DirichletZero)};
  }
  if (id == "sine-gordon-2d") {
    return {std::string(id), ModelKind::SineGordon,
            SpatialGrid::rectangle(nx, nx, -7.0, 7.0, -7.0, 7.0, Boundary::Periodic)};
  }
  if (id == "klein-gordon-2d") {
    return {std::string(id), ModelKind::KleinGordon,
            SpatialGrid::rectangle(nx, nx, -10.0, 10.0, -10.0, 10.0, Boundary::Periodic)};
  }
  if (id == "kgz-2d") {
    return {std::string(id), ModelKind::KleinGordonZakharov,
            SpatialGrid::rectangle(nx, nx, -20.0, 20.0, -20.0, 20.0, Boundary::Periodic)};
  }
  throw InvalidArgument("unknown model id '" + std::string(id) + "'");
}

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

template <class F>
Vector sample(const SpatialGrid& grid, F&& f) {
  Vector v(grid.size());
  for (Index iy = 0; iy < grid.ny; ++iy) {
    for (Index ix = 0; ix < grid.nx; ++ix) v[grid.node(ix, iy)] = f(grid.x(ix), grid.y(iy));
  }
  return v;
}

}  // namespace

FomState wave_initial_condition(std::string_view id, const SpatialGrid& grid) {
  FomState state;
  if (id == "sine-gordon-1d") {
    // Gaussian pulse released at rest; it sheds radiation that wraps around the period
    state.q = sample(grid, [](double x, double) { return 4.0 * std::exp(-x * x); });
  } else if (id == "exp-wave") {
    state.q = sample(grid, [](double x, double) { return 0.5 * x * (std::numbers::pi - x); });
  } else if (id == "sine-gordon-2d") {
    state.q = sample(grid, [](double x, double y) {
      return 4.0 * std::atan(std::exp(3.0 - std::sqrt(x * x + y * y)));
    });
  } else if (id == "klein-gordon-2d") {
    state.q = sample(grid, [](double x, double y) { return 2.0 * sech(std::cosh(x * x + y * y)); });
  } else {
    throw InvalidArgument("wave_initial_condition: unknown model id '" + std::string(id) + "'");
  }
  state.p = Vector::Zero(grid.size());
  state.t = 0.0;
  return state;
}

KgzState kgz_initial_condition(const SpatialGrid& grid) {
  const auto bump = [](double x, double y) {
    return sech(-(x - 2.0) * (x - 2.0) - y * y) + sech(-x * x - (y - 2.0) * (y - 2.0));
  };
  const Index n = grid.size();
  KgzState state;
  state.q1 = sample(grid, bump);
  state.q2 = Vector::Zero(n);
  state.p1 = Vector::Zero(n);
  state.p2 = Vector::Zero(n);
  state.varphi = Vector::Zero(n);
  state.phi = sample(grid, bump);
  return state;
}

std::variant<FomState, KgzState> initial_condition(std::string_view id, const SpatialGrid& grid) {
  if (id == "kgz-2d") return kgz_initial_condition(grid);
  return wave_initial_condition(id, grid);
}

}  // namespace splift
