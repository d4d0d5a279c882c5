#include "splift/lifting.hpp"

#include <cmath>
#include <numbers>

namespace splift {

LiftingMap energy_quadratization(ModelKind kind, double kappa, double kappa_bar, double mu) {
  require(kappa != 0.0, "energy_quadratization: kappa must be nonzero");
  LiftingMap map;
  map.kind = kind;
  map.variant = LiftingVariant::EnergyQuadratization;
  map.kappa = kappa;
  map.kappa_bar = kappa_bar;
  map.mu = mu;
  const double k2 = kappa * kappa;
  switch (kind) {
    case ModelKind::SineGordon:
      require(kappa_bar != 0.0, "energy_quadratization: kappa_bar must be nonzero");
      map.k = 2;
      map.p_products = {{-kappa_bar, 1, 2}};
      map.alpha_q = {0.0, 0.0};
      map.alpha_w = {{0.0, 0.5 * k2 * kappa_bar}, {-1.0 / (2.0 * kappa_bar * k2), 0.0}};
      map.energy_quadratic = {1.0 / k2, 0.0};
      break;
    case ModelKind::Exponential:
      map.k = 1;
      map.p_products = {{1.0 / k2, 1, 1}};
      map.alpha_q = {0.0};
      map.alpha_w = {{-0.5}};
      map.energy_quadratic = {1.0 / k2};
      break;
    case ModelKind::KleinGordon:
      map.k = 1;
      map.p_products = {{-2.0 * mu / kappa, 1, 0}};
      map.alpha_q = {kappa};
      map.alpha_w = {{0.0}};
      map.energy_quadratic = {mu / k2};
      break;
    case ModelKind::KleinGordonZakharov:
      throw InvalidArgument("energy_quadratization: KGZ uses build_kgz_lifted_operators");
  }
  map.p_linear.assign(std::size_t(map.k), 0.0);
  map.energy_linear.assign(std::size_t(map.k), 0.0);
  return map;
}

LiftingMap default_lifting(ModelKind kind, double mu) {
  switch (kind) {
    case ModelKind::SineGordon: return energy_quadratization(kind, 1.0 / std::numbers::sqrt2, 2.0, mu);
    case ModelKind::Exponential: return energy_quadratization(kind, 1.0, 2.0, mu);
    case ModelKind::KleinGordon: return energy_quadratization(kind, 2.0, 2.0, mu);
    case ModelKind::KleinGordonZakharov: break;
  }
  throw InvalidArgument("default_lifting: unsupported model");
}

LiftingMap standard_lifting_sg() {
  LiftingMap map;
  map.kind = ModelKind::SineGordon;
  map.variant = LiftingVariant::Standard;
  map.k = 2;
  map.p_linear = {-1.0, 0.0};
  map.alpha_q = {0.0, 0.0};
  map.alpha_w = {{0.0, 1.0}, {-1.0, 0.0}};
  map.energy_quadratic = {0.0, 0.0};
  map.energy_linear = {0.0, -1.0};
  map.energy_constant_per_node = 1.0;
  return map;
}

double LiftingMap::tau(int j, double q) const {
  require(j >= 1 && j <= k, "LiftingMap::tau: auxiliary index out of range");
  if (variant == LiftingVariant::Standard) return j == 1 ? std::sin(q) : std::cos(q);
  switch (kind) {
    case ModelKind::SineGordon:
      return j == 1 ? std::numbers::sqrt2 * kappa * std::sin(0.5 * q)
                    : std::numbers::sqrt2 * std::cos(0.5 * q) / (kappa_bar * kappa);
    case ModelKind::Exponential: return kappa * std::exp(-0.5 * q);
    case ModelKind::KleinGordon: return 0.5 * kappa * q * q;
    case ModelKind::KleinGordonZakharov: break;
  }
  throw InvalidArgument("LiftingMap::tau: unsupported model");
}

Vector lift_state(const LiftingMap& map, const FomState& state) {
  const Index n = state.q.size();
  require_size(state.p.size(), n, "lift_state");
  Vector ybar(Index(2 + map.k) * n);
  ybar.head(n) = state.q;
  ybar.segment(n, n) = state.p;
  for (int j = 1; j <= map.k; ++j) {
    for (Index m = 0; m < n; ++m) ybar[(1 + j) * n + m] = map.tau(j, state.q[m]);
  }
  return ybar;
}

Vector lift_state(const KgzState& state) {
  const Index n = state.size();
  Vector ybar(7 * n);
  ybar.head(6 * n) = stack(state);
  ybar.tail(n) = state.q1.cwiseAbs2() + state.q2.cwiseAbs2();
  return ybar;
}

std::vector<Matrix> lift_snapshots(const LiftingMap& map, const Matrix& q) {
  std::vector<Matrix> out;
  out.reserve(std::size_t(map.k));
  for (int j = 1; j <= map.k; ++j) {
    out.emplace_back(q.unaryExpr([&](double v) { return map.tau(j, v); }));
  }
  return out;
}

Matrix lift_kgz_snapshots(const Matrix& q1, const Matrix& q2) {
  require(q1.rows() == q2.rows() && q1.cols() == q2.cols(), "lift_kgz_snapshots: shape mismatch");
  return q1.cwiseAbs2() + q2.cwiseAbs2();
}

namespace {

void append_block(std::vector<Triplet>& out, const SparseMatrix& m, Index row0, Index col0,
                  double scale) {
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      out.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
    }
  }
}

void append_identity(std::vector<Triplet>& out, Index n, Index row0, Index col0, double scale) {
  for (Index m = 0; m < n; ++m) out.emplace_back(row0 + m, col0 + m, scale);
}

void append_hadamard(std::vector<QuadraticTerm>& out, Index n, Index row_block, Index a_block,
                     Index b_block, double value) {
  for (Index m = 0; m < n; ++m) {
    out.push_back({row_block * n + m, a_block * n + m, b_block * n + m, value});
  }
}

SparseMatrix from_triplets(Index size, const std::vector<Triplet>& entries) {
  SparseMatrix s(size, size);
  s.setFromTriplets(entries.begin(), entries.end());
  s.makeCompressed();
  return s;
}

}  // namespace

LiftedModel build_lifted_operators(const LiftingMap& map, const SparseMatrix& laplacian) {
  require(map.kind != ModelKind::KleinGordonZakharov,
          "build_lifted_operators: KGZ uses build_kgz_lifted_operators");
  require(laplacian.rows() == laplacian.cols(), "build_lifted_operators: non-square Laplacian");
  const Index n = laplacian.rows();
  const Index blocks = 2 + map.k;
  constexpr Index q_block = 0, p_block = 1;
  auto aux_block = [](int j) { return Index(1 + j); };
  auto product_block = [&](int id) { return id == 0 ? q_block : aux_block(id); };

  LiftedModel model;
  model.kind = map.kind;
  model.variant = map.variant;
  model.n = n;
  model.nbar = blocks * n;
  model.block_labels = {"q", "p"};
  for (int j = 1; j <= map.k; ++j) model.block_labels.push_back("w" + std::to_string(j));

  std::vector<Triplet> a;
  append_identity(a, n, q_block * n, p_block * n, 1.0);
  append_block(a, laplacian, p_block * n, q_block * n, 1.0);
  for (int j = 1; j <= map.k; ++j) {
    if (map.p_linear[std::size_t(j - 1)] != 0.0) {
      append_identity(a, n, p_block * n, aux_block(j) * n, map.p_linear[std::size_t(j - 1)]);
    }
  }
  model.linear = from_triplets(model.nbar, a);

  for (const ProductTerm& term : map.p_products) {
    append_hadamard(model.quadratic, n, p_block, product_block(term.a), product_block(term.b),
                    term.coefficient);
  }
  for (int j = 1; j <= map.k; ++j) {
    const auto jj = std::size_t(j - 1);
    if (map.alpha_q[jj] != 0.0) {
      append_hadamard(model.quadratic, n, aux_block(j), q_block, p_block, map.alpha_q[jj]);
    }
    for (int i = 1; i <= map.k; ++i) {
      const double alpha = map.alpha_w[jj][std::size_t(i - 1)];
      if (alpha != 0.0) append_hadamard(model.quadratic, n, aux_block(j), aux_block(i), p_block, alpha);
    }
  }

  std::vector<Triplet> h;
  append_block(h, laplacian, q_block * n, q_block * n, -1.0);
  append_identity(h, n, p_block * n, p_block * n, 1.0);
  model.energy_linear = Vector::Zero(model.nbar);
  for (int j = 1; j <= map.k; ++j) {
    const auto jj = std::size_t(j - 1);
    if (map.energy_quadratic[jj] != 0.0) {
      append_identity(h, n, aux_block(j) * n, aux_block(j) * n, 2.0 * map.energy_quadratic[jj]);
    }
    model.energy_linear.segment(aux_block(j) * n, n).setConstant(map.energy_linear[jj]);
  }
  model.energy_hessian = from_triplets(model.nbar, h);
  model.energy_constant = map.energy_constant_per_node * double(n);
  return model;
}

LiftedModel build_standard_lifting_sg(const SparseMatrix& laplacian) {
  return build_lifted_operators(standard_lifting_sg(), laplacian);
}

LiftedModel build_kgz_lifted_operators(const SparseMatrix& laplacian) {
  require(laplacian.rows() == laplacian.cols(), "build_kgz_lifted_operators: non-square Laplacian");
  const Index n = laplacian.rows();
  enum : Index { q1 = 0, q2, p1, p2, varphi, phi, w };

  LiftedModel model;
  model.kind = ModelKind::KleinGordonZakharov;
  model.n = n;
  model.nbar = 7 * n;
  model.block_labels = {"q1", "q2", "p1", "p2", "varphi", "phi", "w"};

  std::vector<Triplet> a;
  append_identity(a, n, q1 * n, p1 * n, 1.0);
  append_identity(a, n, q2 * n, p2 * n, 1.0);
  append_block(a, laplacian, p1 * n, q1 * n, 1.0);
  append_identity(a, n, p1 * n, q1 * n, -1.0);
  append_block(a, laplacian, p2 * n, q2 * n, 1.0);
  append_identity(a, n, p2 * n, q2 * n, -1.0);
  append_identity(a, n, varphi * n, phi * n, 1.0);
  append_identity(a, n, varphi * n, w * n, 1.0);
  append_block(a, laplacian, phi * n, varphi * n, 1.0);
  model.linear = from_triplets(model.nbar, a);

  append_hadamard(model.quadratic, n, p1, phi, q1, -1.0);
  append_hadamard(model.quadratic, n, p1, w, q1, -1.0);
  append_hadamard(model.quadratic, n, p2, phi, q2, -1.0);
  append_hadamard(model.quadratic, n, p2, w, q2, -1.0);
  append_hadamard(model.quadratic, n, w, q1, p1, 2.0);
  append_hadamard(model.quadratic, n, w, q2, p2, 2.0);

  std::vector<Triplet> h;
  for (Index block : {q1, q2}) {
    append_identity(h, n, block * n, block * n, 2.0);
    append_block(h, laplacian, block * n, block * n, -2.0);
  }
  append_identity(h, n, p1 * n, p1 * n, 2.0);
  append_identity(h, n, p2 * n, p2 * n, 2.0);
  append_block(h, laplacian, varphi * n, varphi * n, -1.0);
  append_identity(h, n, phi * n, phi * n, 1.0);
  append_identity(h, n, w * n, w * n, 1.0);
  append_identity(h, n, phi * n, w * n, 1.0);
  append_identity(h, n, w * n, phi * n, 1.0);
  model.energy_hessian = from_triplets(model.nbar, h);
  model.energy_linear = Vector::Zero(model.nbar);
  model.energy_constant = 0.0;
  return model;
}

Vector lifted_rhs(const LiftedModel& model, const Vector& ybar) {
  require_size(ybar.size(), model.nbar, "lifted_rhs");
  Vector out = model.linear * ybar;
  for (const QuadraticTerm& t : model.quadratic) out[t.row] += t.value * ybar[t.i] * ybar[t.j];
  return out;
}

SparseMatrix lifted_jacobian(const LiftedModel& model, const Vector& ybar) {
  require_size(ybar.size(), model.nbar, "lifted_jacobian");
  std::vector<Triplet> entries;
  entries.reserve(std::size_t(model.linear.nonZeros()) + 2 * model.quadratic.size());
  append_block(entries, model.linear, 0, 0, 1.0);
  for (const QuadraticTerm& t : model.quadratic) {
    entries.emplace_back(t.row, t.i, t.value * ybar[t.j]);
    entries.emplace_back(t.row, t.j, t.value * ybar[t.i]);
  }
  return from_triplets(model.nbar, entries);
}

double lifted_energy(const LiftedModel& model, const Vector& ybar) {
  require_size(ybar.size(), model.nbar, "lifted_energy");
  return 0.5 * ybar.dot(model.energy_hessian * ybar) + model.energy_linear.dot(ybar) +
         model.energy_constant;
}

Vector lifted_energy_gradient(const LiftedModel& model, const Vector& ybar) {
  require_size(ybar.size(), model.nbar, "lifted_energy_gradient");
  return model.energy_hessian * ybar + model.energy_linear;
}

}  // namespace splift
