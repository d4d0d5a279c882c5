#include "splift/rom.hpp"

#include <algorithm>

namespace splift {

Index QuadraticRom::block_offset(Index block) const {
  Index offset = 0;
  for (Index b = 0; b < block; ++b) offset += block_dims[std::size_t(b)];
  return offset;
}

Matrix project_linear(const SparseMatrix& a, const BlockDiagonalBasis& basis) {
  const Index nbar = basis.full_dim();
  require(a.rows() == nbar && a.cols() == nbar, "project_linear: operator/basis size mismatch");
  const Index rbar = basis.reduced_dim();
  Matrix out = Matrix::Zero(rbar, rbar);
  for (Index col = 0; col < basis.block_count(); ++col) {
    const Matrix& vc = basis.block(col);
    const Matrix av = a.middleCols(basis.full_offset(col), vc.rows()) * vc;
    for (Index row = 0; row < basis.block_count(); ++row) {
      const Matrix& vr = basis.block(row);
      out.block(basis.reduced_offset(row), basis.reduced_offset(col), vr.cols(), vc.cols()).noalias() =
          vr.transpose() * av.middleRows(basis.full_offset(row), vr.rows());
    }
  }
  return out;
}

namespace {

struct BlockLocator {
  std::vector<Index> full_start;
  std::vector<Index> reduced_start;
  std::vector<Index> ranks;

  explicit BlockLocator(const BlockDiagonalBasis& basis) {
    for (Index b = 0; b < basis.block_count(); ++b) {
      full_start.push_back(basis.full_offset(b));
      reduced_start.push_back(basis.reduced_offset(b));
      ranks.push_back(basis.block(b).cols());
    }
  }

  Index block_of(Index g) const {
    return Index(std::upper_bound(full_start.begin(), full_start.end(), g) - full_start.begin()) - 1;
  }
};

}  // namespace

Matrix project_quadratic_sparse(const std::vector<QuadraticTerm>& b, Index nbar,
                                const BlockDiagonalBasis& basis) {
  require(basis.full_dim() == nbar, "project_quadratic_sparse: basis/operator size mismatch");
  for (const auto& t : b) {
    if (t.row < 0 || t.row >= nbar || t.i < 0 || t.i >= nbar || t.j < 0 || t.j >= nbar) {
      throw InvalidArgument("project_quadratic_sparse: index out of range");
    }
  }
  const Index rbar = basis.reduced_dim();
  const Index nb = basis.block_count();
  const BlockLocator loc(basis);
  auto local_row = [&](Index g, Index blk) { return basis.block(blk).row(g - loc.full_start[std::size_t(blk)]); };

  std::vector<QuadraticTerm> sorted = b;
  std::sort(sorted.begin(), sorted.end(), [](const QuadraticTerm& x, const QuadraticTerm& y) {
    if (x.j != y.j) return x.j < y.j;
    if (x.i != y.i) return x.i < y.i;
    return x.row < y.row;
  });

  Matrix out = Matrix::Zero(rbar, rbar * rbar);
  // Mode-2 accumulators, one per (row block, i block) for the current j.
  std::vector<Matrix> mode2(static_cast<std::size_t>(nb * nb));
  std::vector<char> mode2_used(std::size_t(nb * nb), 0);
  std::vector<Vector> mode1(static_cast<std::size_t>(nb));
  std::vector<char> mode1_used(std::size_t(nb), 0);

  std::size_t pos = 0;
  while (pos < sorted.size()) {
    const Index j = sorted[pos].j;
    std::fill(mode2_used.begin(), mode2_used.end(), 0);
    while (pos < sorted.size() && sorted[pos].j == j) {
      const Index i = sorted[pos].i;
      std::fill(mode1_used.begin(), mode1_used.end(), 0);
      // mode 1: contract the row index with V' for this (i, j) fiber
      while (pos < sorted.size() && sorted[pos].j == j && sorted[pos].i == i) {
        const QuadraticTerm& t = sorted[pos];
        const Index rb = loc.block_of(t.row);
        auto& acc = mode1[std::size_t(rb)];
        if (!mode1_used[std::size_t(rb)]) {
          acc = Vector::Zero(loc.ranks[std::size_t(rb)]);
          mode1_used[std::size_t(rb)] = 1;
        }
        acc.noalias() += t.value * local_row(t.row, rb).transpose();
        ++pos;
      }
      // mode 2: contract i
      const Index ib = loc.block_of(i);
      const auto vi = local_row(i, ib);
      for (Index rb = 0; rb < nb; ++rb) {
        if (!mode1_used[std::size_t(rb)]) continue;
        const std::size_t key = std::size_t(rb * nb + ib);
        if (!mode2_used[key]) {
          mode2[key] = Matrix::Zero(loc.ranks[std::size_t(rb)], loc.ranks[std::size_t(ib)]);
          mode2_used[key] = 1;
        }
        mode2[key].noalias() += mode1[std::size_t(rb)] * vi;
      }
    }
    // mode 3: contract j
    const Index jb = loc.block_of(j);
    const auto vj = local_row(j, jb);
    const Index j0 = loc.reduced_start[std::size_t(jb)];
    const Index rj = loc.ranks[std::size_t(jb)];
    for (Index rb = 0; rb < nb; ++rb) {
      for (Index ib = 0; ib < nb; ++ib) {
        const std::size_t key = std::size_t(rb * nb + ib);
        if (!mode2_used[key]) continue;
        const Matrix& m = mode2[key];
        const Index a0 = loc.reduced_start[std::size_t(rb)];
        const Index s0 = loc.reduced_start[std::size_t(ib)];
        for (Index s = 0; s < m.cols(); ++s) {
          out.block(a0, (s0 + s) * rbar + j0, m.rows(), rj).noalias() += m.col(s) * vj;
        }
      }
    }
  }
  return out;
}

QuadraticRom build_quadratic_rom(const LiftedModel& model, const BlockDiagonalBasis& basis) {
  require(basis.full_dim() == model.nbar, "build_quadratic_rom: basis/model size mismatch");
  QuadraticRom rom;
  rom.Ar = project_linear(model.linear, basis);
  rom.Br = project_quadratic_sparse(model.quadratic, model.nbar, basis);
  const Matrix h = project_linear(model.energy_hessian, basis);
  rom.energy_hessian = 0.5 * (h + h.transpose());
  rom.energy_linear = model.energy_linear.size() == model.nbar ? basis.project(model.energy_linear)
                                                               : Vector::Zero(rom.Ar.rows());
  rom.energy_constant = model.energy_constant;
  for (const auto& blk : basis.blocks) {
    rom.block_labels.push_back(blk.label);
    rom.block_dims.push_back(blk.basis.rank());
  }
  rom.br_blocks = compress_quadratic(rom.Br, rom.block_dims);
  return rom;
}

namespace {

Vector kron_self(const Vector& y) {
  const Index r = y.size();
  Vector k(r * r);
  for (Index s = 0; s < r; ++s) k.segment(s * r, r) = y[s] * y;
  return k;
}

}  // namespace

std::vector<QuadraticBlock> compress_quadratic(const Matrix& br, const std::vector<Index>& block_dims) {
  const Index r = br.rows();
  require(br.cols() == r * r, "compress_quadratic: Br must be r x r^2");
  Index total = 0;
  std::vector<Index> start;
  for (Index d : block_dims) {
    start.push_back(total);
    total += d;
  }
  require(total == r, "compress_quadratic: block dimensions do not sum to r");
  const std::size_t nb = block_dims.size();
  std::vector<QuadraticBlock> out;
  for (std::size_t a = 0; a < nb; ++a) {
    for (std::size_t s = 0; s < nb; ++s) {
      for (std::size_t t = 0; t < nb; ++t) {
        QuadraticBlock blk{start[a], block_dims[a], start[s], block_dims[s], start[t], block_dims[t], {}};
        blk.coeffs.resize(blk.rows, blk.s_dim * blk.t_dim);
        for (Index si = 0; si < blk.s_dim; ++si) {
          blk.coeffs.middleCols(si * blk.t_dim, blk.t_dim) =
              br.block(blk.row0, (blk.s0 + si) * r + blk.t0, blk.rows, blk.t_dim);
        }
        if (blk.coeffs.size() > 0 && blk.coeffs.cwiseAbs().maxCoeff() > 0.0) out.push_back(std::move(blk));
      }
    }
  }
  return out;
}

Vector apply_quadratic(const std::vector<QuadraticBlock>& blocks, const Vector& y) {
  Vector out = Vector::Zero(y.size());
  Vector kron;
  for (const auto& b : blocks) {
    kron.resize(b.s_dim * b.t_dim);
    for (Index s = 0; s < b.s_dim; ++s) kron.segment(s * b.t_dim, b.t_dim) = y[b.s0 + s] * y.segment(b.t0, b.t_dim);
    out.segment(b.row0, b.rows).noalias() += b.coeffs * kron;
  }
  return out;
}

void add_quadratic_jacobian(const std::vector<QuadraticBlock>& blocks, const Vector& y, double scale,
                            Matrix& jac) {
  for (const auto& b : blocks) {
    const auto yt = y.segment(b.t0, b.t_dim);
    for (Index s = 0; s < b.s_dim; ++s) {
      const auto ms = b.coeffs.middleCols(s * b.t_dim, b.t_dim);
      jac.block(b.row0, b.t0, b.rows, b.t_dim).noalias() += (scale * y[b.s0 + s]) * ms;
      jac.col(b.s0 + s).segment(b.row0, b.rows).noalias() += scale * (ms * yt);
    }
  }
}

Vector rom_rhs(const QuadraticRom& rom, const Vector& y) {
  require_size(y.size(), rom.dim(), "rom_rhs");
  if (!rom.br_blocks.empty() || rom.Br.size() == 0) {
    Vector out = apply_quadratic(rom.br_blocks, y);
    out.noalias() += rom.Ar * y;
    return out;
  }
  Vector out = rom.Ar * y;
  out.noalias() += rom.Br * kron_self(y);
  return out;
}

Matrix quadratic_jacobian(const Matrix& br, const Vector& y) {
  const Index r = y.size();
  require(br.rows() == r && br.cols() == r * r, "quadratic_jacobian: size mismatch");
  Matrix j = Matrix::Zero(r, r);
  for (Index s = 0; s < r; ++s) {
    const auto ms = br.middleCols(s * r, r);
    j.col(s).noalias() += ms * y;
    j.noalias() += y[s] * ms;
  }
  return j;
}

Matrix rom_jacobian(const QuadraticRom& rom, const Vector& y) {
  require_size(y.size(), rom.dim(), "rom_jacobian");
  if (!rom.br_blocks.empty() || rom.Br.size() == 0) {
    Matrix jac = rom.Ar;
    add_quadratic_jacobian(rom.br_blocks, y, 1.0, jac);
    return jac;
  }
  return rom.Ar + quadratic_jacobian(rom.Br, y);
}

double reduced_lifted_energy(const QuadraticRom& rom, const Vector& y) {
  require_size(y.size(), rom.dim(), "reduced_lifted_energy");
  return 0.5 * y.dot(rom.energy_hessian * y) + rom.energy_linear.dot(y) + rom.energy_constant;
}

Vector reduced_energy_gradient(const QuadraticRom& rom, const Vector& y) {
  require_size(y.size(), rom.dim(), "reduced_energy_gradient");
  return rom.energy_hessian * y + rom.energy_linear;
}

double energy_rate_residual(const QuadraticRom& rom, const Vector& y) {
  return reduced_energy_gradient(rom, y).dot(rom_rhs(rom, y));
}

HamiltonianRom build_psd_rom(const FomModel& model, const Matrix& phi) {
  require(phi.rows() == model.size(), "build_psd_rom: basis row count mismatch");
  HamiltonianRom rom;
  rom.model = &model;
  rom.phi = phi;
  const Matrix dphi = model.laplacian * phi;
  const Matrix d_hat = phi.transpose() * dphi;
  rom.d_hat = 0.5 * (d_hat + d_hat.transpose());
  return rom;
}

Vector psd_rhs(const HamiltonianRom& rom, const Vector& y) {
  const Index r = rom.r();
  require_size(y.size(), 2 * r, "psd_rhs");
  const Vector q = rom.phi * y.head(r);
  Vector grad(q.size());
  for (Index i = 0; i < q.size(); ++i) grad[i] = rom.model->nonlinearity.dg(q[i]);
  Vector out(2 * r);
  out.head(r) = y.tail(r);
  out.tail(r).noalias() = rom.d_hat * y.head(r);
  out.tail(r).noalias() -= rom.phi.transpose() * grad;
  return out;
}

Matrix psd_jacobian(const HamiltonianRom& rom, const Vector& y) {
  const Index r = rom.r();
  require_size(y.size(), 2 * r, "psd_jacobian");
  const Vector q = rom.phi * y.head(r);
  Vector curv(q.size());
  for (Index i = 0; i < q.size(); ++i) curv[i] = rom.model->nonlinearity.d2g(q[i]);
  Matrix j = Matrix::Zero(2 * r, 2 * r);
  j.topRightCorner(r, r).setIdentity();
  j.bottomLeftCorner(r, r) = rom.d_hat;
  j.bottomLeftCorner(r, r).noalias() -= rom.phi.transpose() * curv.asDiagonal() * rom.phi;
  return j;
}

double psd_hamiltonian(const HamiltonianRom& rom, const Vector& y) {
  const Index r = rom.r();
  require_size(y.size(), 2 * r, "psd_hamiltonian");
  const Vector q = rom.phi * y.head(r);
  double potential = 0.0;
  for (Index i = 0; i < q.size(); ++i) potential += rom.model->nonlinearity.g(q[i]);
  const auto qh = y.head(r);
  const auto ph = y.tail(r);
  return 0.5 * ph.squaredNorm() - 0.5 * qh.dot(rom.d_hat * qh) + potential;
}

KgzGalerkinRom build_kgz_galerkin_rom(const SparseMatrix& laplacian, const Matrix& phi,
                                      const Matrix& v) {
  require(phi.rows() == laplacian.rows() && v.rows() == laplacian.rows(),
          "build_kgz_galerkin_rom: basis row count mismatch");
  KgzGalerkinRom rom;
  rom.phi = phi;
  rom.v = v;
  const Matrix d1 = phi.transpose() * (laplacian * phi);
  const Matrix d2 = v.transpose() * (laplacian * v);
  rom.d1 = 0.5 * (d1 + d1.transpose());
  rom.d2 = 0.5 * (d2 + d2.transpose());
  return rom;
}

Vector kgz_galerkin_rhs(const KgzGalerkinRom& rom, const Vector& y) {
  const Index r = rom.r_phi(), s = rom.r_v();
  require_size(y.size(), rom.dim(), "kgz_galerkin_rhs");
  const auto q1 = y.segment(0, r), q2 = y.segment(r, r);
  const auto p1 = y.segment(2 * r, r), p2 = y.segment(3 * r, r);
  const auto varphi = y.segment(4 * r, s), field = y.segment(4 * r + s, s);
  const Vector u1 = rom.phi * q1, u2 = rom.phi * q2;
  const Vector f = rom.v * field;
  const Vector density = u1.cwiseAbs2() + u2.cwiseAbs2();
  const Vector coupling = f + density;
  Vector out(rom.dim());
  out.segment(0, r) = p1;
  out.segment(r, r) = p2;
  out.segment(2 * r, r) = rom.d1 * q1 - q1 - rom.phi.transpose() * coupling.cwiseProduct(u1);
  out.segment(3 * r, r) = rom.d1 * q2 - q2 - rom.phi.transpose() * coupling.cwiseProduct(u2);
  out.segment(4 * r, s) = field + rom.v.transpose() * density;
  out.segment(4 * r + s, s) = rom.d2 * varphi;
  return out;
}

Vector kgz_galerkin_expand(const KgzGalerkinRom& rom, const Vector& y) {
  const Index r = rom.r_phi(), s = rom.r_v();
  require_size(y.size(), rom.dim(), "kgz_galerkin_expand");
  const Index n = rom.phi.rows();
  Vector out(6 * n);
  for (Index b = 0; b < 4; ++b) out.segment(b * n, n) = rom.phi * y.segment(b * r, r);
  out.segment(4 * n, n) = rom.v * y.segment(4 * r, s);
  out.segment(5 * n, n) = rom.v * y.segment(4 * r + s, s);
  return out;
}

}  // namespace splift
