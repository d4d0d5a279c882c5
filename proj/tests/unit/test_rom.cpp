#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include "splift/harness.hpp"
#include "splift/rom.hpp"
#include "support.hpp"

using namespace splift;
using namespace testing;

namespace {

Matrix dense_b(const std::vector<QuadraticTerm>& b, Index nbar) {
  Matrix out = Matrix::Zero(nbar, nbar * nbar);
  for (const auto& t : b) out(t.row, t.i * nbar + t.j) += t.value;
  return out;
}

std::vector<QuadraticTerm> random_triples(Index nbar, int count) {
  std::uniform_int_distribution<Index> idx(0, nbar - 1);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<QuadraticTerm> out;
  for (int k = 0; k < count; ++k) out.push_back({idx(rng()), idx(rng()), idx(rng()), val(rng())});
  return out;
}

BlockDiagonalBasis random_block_basis(const std::vector<Index>& rows, const std::vector<Index>& cols) {
  BlockDiagonalBasis v;
  for (std::size_t b = 0; b < rows.size(); ++b) {
    v.blocks.push_back({"b" + std::to_string(b), OrthonormalBasis{random_orthonormal(rows[b], cols[b]),
                                                                  Vector::Ones(cols[b])}});
  }
  return v;
}

BlockDiagonalBasis identity_basis(Index n) { return BlockDiagonalBasis::single(Matrix::Identity(n, n)); }

struct SgSetup {
  Index n = 40;
  SpatialGrid grid = SpatialGrid::line(40, -8.0, 8.0, Boundary::Periodic);
  FomModel fom = make_wave_model(ModelKind::SineGordon, grid);
  LiftingMap map = default_lifting(ModelKind::SineGordon);
  LiftedModel lifted = build_lifted_operators(map, fom.laplacian);
  OrthonormalBasis phi = cotangent_lift(random_matrix(40, 12), random_matrix(40, 12), 4);
  BlockDiagonalBasis basis = build_lifted_basis(phi, {random_matrix(40, 12), random_matrix(40, 12)}, 4);
  QuadraticRom rom = build_quadratic_rom(lifted, basis);
};

}  // namespace

TEST_CASE("project_linear") {
  const Index nbar = 12;
  SparseMatrix a = random_matrix(nbar, nbar).unaryExpr([](double x) { return std::abs(x) < 0.6 ? 0.0 : x; }).sparseView();
  CHECK(max_abs_diff(project_linear(a, identity_basis(nbar)), Matrix(a)) == 0.0);

  const auto v = random_block_basis({6, 6}, {2, 2});
  SparseMatrix eye(nbar, nbar);
  eye.setIdentity();
  CHECK(max_abs_diff(project_linear(eye, v), Matrix::Identity(4, 4)) <= 1e-14);

  const Matrix vd = v.dense();
  CHECK(max_abs_diff(project_linear(a, v), vd.transpose() * Matrix(a) * vd) <= 1e-13);
  CHECK_THROWS_AS(project_linear(SparseMatrix(11, 11), v), InvalidArgument);
}

TEST_CASE("project_quadratic_sparse") {
  SUBCASE("identity basis reproduces B") {
    const Index nbar = 6;
    const auto b = random_triples(nbar, 15);
    CHECK(max_abs_diff(project_quadratic_sparse(b, nbar, identity_basis(nbar)), dense_b(b, nbar)) <= 1e-15);
  }
  SUBCASE("explicit Kronecker oracle") {
    const Index nbar = 8;
    const auto b = random_triples(nbar, 20);
    const auto v = BlockDiagonalBasis::single(random_orthonormal(nbar, 3));
    const Matrix vd = v.dense();
    const Matrix kron = Eigen::kroneckerProduct(vd, vd);
    const Matrix oracle = vd.transpose() * dense_b(b, nbar) * kron;
    const Matrix br = project_quadratic_sparse(b, nbar, v);
    CHECK(max_abs_diff(br, oracle) <= 1e-12);

    const Vector y = random_vector(3);
    const Vector full = vd * y;
    Vector quad = Vector::Zero(nbar);
    for (const auto& t : b) quad[t.row] += t.value * full[t.i] * full[t.j];
    const Vector yy = Eigen::kroneckerProduct(y, y);
    CHECK(max_abs_diff(vd.transpose() * quad, br * yy) <= 1e-12);
  }
  SUBCASE("block basis") {
    const Index nbar = 9;
    const auto b = random_triples(nbar, 25);
    const auto v = random_block_basis({3, 3, 3}, {2, 1, 2});
    const Matrix vd = v.dense();
    const Matrix oracle = vd.transpose() * dense_b(b, nbar) * Matrix(Eigen::kroneckerProduct(vd, vd));
    CHECK(max_abs_diff(project_quadratic_sparse(b, nbar, v), oracle) <= 1e-12);
  }
  SUBCASE("out-of-range triples") {
    std::vector<QuadraticTerm> b{{0, 0, 6, 1.0}};
    CHECK_THROWS_AS(project_quadratic_sparse(b, 6, identity_basis(6)), InvalidArgument);
  }
}

TEST_CASE("block-sparse evaluation of Br") {
  const Index dim = 7;
  Matrix br = Matrix::Zero(dim, dim * dim);
  const std::vector<Index> dims{3, 4};
  // populate only the (row block 1, s block 0, t block 1) slab
  for (Index r = 3; r < 7; ++r)
    for (Index s = 0; s < 3; ++s)
      for (Index t = 3; t < 7; ++t) br(r, s * dim + t) = random_vector(1)[0];
  const auto blocks = compress_quadratic(br, dims);
  CHECK(blocks.size() == 1);
  const Vector y = random_vector(dim);
  const Vector yy = Eigen::kroneckerProduct(y, y);
  CHECK(max_abs_diff(apply_quadratic(blocks, y), br * yy) <= 1e-14);
  Matrix jac = Matrix::Zero(dim, dim);
  add_quadratic_jacobian(blocks, y, 1.0, jac);
  CHECK(max_abs_diff(jac, quadratic_jacobian(br, y)) <= 1e-14);
}

TEST_CASE("quadratic jacobian matches finite differences") {
  const Matrix br = random_matrix(4, 16);
  const Vector y = random_vector(4);
  const auto f = [&](const Vector& x) { return Vector(br * Eigen::kroneckerProduct(x, x)); };
  Matrix fd(4, 4);
  for (Index k = 0; k < 4; ++k) {
    Vector yp = y, ym = y;
    yp[k] += 1e-6;
    ym[k] -= 1e-6;
    fd.col(k) = (f(yp) - f(ym)) / 2e-6;
  }
  CHECK(max_abs_diff(quadratic_jacobian(br, y), fd) <= 1e-8);
}

TEST_CASE("quadratic ROM of the sine-Gordon lifting") {
  SgSetup s;
  const Matrix vd = s.basis.dense();
  CHECK(s.rom.dim() == 16);
  CHECK(rom_rhs(s.rom, Vector::Zero(16)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(reduced_lifted_energy(s.rom, Vector::Zero(16)) == 0.0);
  CHECK_THROWS_AS(rom_rhs(s.rom, Vector::Zero(15)), InvalidArgument);

  for (int trial = 0; trial < 100; ++trial) {
    const Vector y = random_vector(16);
    const Vector oracle = vd.transpose() * lifted_rhs(s.lifted, vd * y);
    REQUIRE(rel_diff(rom_rhs(s.rom, y), oracle) <= 1e-12);
    const double e = lifted_energy(s.lifted, vd * y);
    REQUIRE(std::abs(reduced_lifted_energy(s.rom, y) - e) <= 1e-12 * std::max(1.0, std::abs(e)));
    const double scale = reduced_energy_gradient(s.rom, y).norm() * rom_rhs(s.rom, y).norm();
    REQUIRE(std::abs(energy_rate_residual(s.rom, y)) <= 1e-12 * scale);
  }

  const Vector y = random_vector(16);
  Matrix fd(16, 16);
  for (Index k = 0; k < 16; ++k) {
    Vector yp = y, ym = y;
    yp[k] += 1e-6;
    ym[k] -= 1e-6;
    fd.col(k) = (rom_rhs(s.rom, yp) - rom_rhs(s.rom, ym)) / 2e-6;
  }
  CHECK(rel_diff(rom_jacobian(s.rom, y), fd) <= 1e-7);
}

TEST_CASE("identity projection reproduces the lifted model") {
  const Index n = 10;
  const auto grid = SpatialGrid::line(n, 0.0, 5.0, Boundary::Periodic);
  const auto lifted = build_lifted_operators(default_lifting(ModelKind::Exponential), build_laplacian(grid));
  const auto rom = build_quadratic_rom(lifted, identity_basis(3 * n));
  const Vector y = random_vector(3 * n);
  CHECK(rel_diff(rom_rhs(rom, y), lifted_rhs(lifted, y)) <= 1e-14);
}

TEST_CASE("energy-quadratized ROMs conserve the reduced energy rate for every wave model") {
  const Index n = 30;
  const auto grid = SpatialGrid::line(n, 0.0, 6.0, Boundary::Periodic);
  const SparseMatrix d = build_laplacian(grid);
  for (auto kind : {ModelKind::SineGordon, ModelKind::Exponential, ModelKind::KleinGordon}) {
    const auto map = default_lifting(kind, 0.8);
    const auto lifted = build_lifted_operators(map, d);
    const auto phi = cotangent_lift(random_matrix(n, 10), random_matrix(n, 10), 5);
    std::vector<Matrix> aux;
    for (int j = 0; j < map.k; ++j) aux.push_back(random_matrix(n, 10));
    const auto rom = build_quadratic_rom(lifted, build_lifted_basis(phi, aux, 5));
    for (int trial = 0; trial < 100; ++trial) {
      const Vector y = random_vector(rom.dim());
      const double scale = reduced_energy_gradient(rom, y).norm() * rom_rhs(rom, y).norm();
      REQUIRE(std::abs(energy_rate_residual(rom, y)) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("standard lifting ROM violates the energy rate identity") {
  const Index n = 200, r = 5;
  const auto grid = SpatialGrid::line(n, -10.0, 10.0, Boundary::Periodic);
  const auto lifted = build_standard_lifting_sg(build_laplacian(grid));
  BlockDiagonalBasis v;
  const OrthonormalBasis phi{random_orthonormal(n, r), Vector::Ones(r)};
  v.blocks = {{"q", phi}, {"p", phi}, {"w1", {random_orthonormal(n, r), Vector::Ones(r)}},
              {"w2", {random_orthonormal(n, r), Vector::Ones(r)}}};
  const auto rom = build_quadratic_rom(lifted, v);
  const Vector y = random_vector(4 * r);

  // independent evaluation of w1' V1' (V2 V2' - I) Phi p
  const Matrix& v1 = v.block(2);
  const Matrix& v2 = v.block(3);
  const Vector w1 = y.segment(2 * r, r), p = y.segment(r, r);
  const Vector phi_p = phi.vectors * p;
  const double oracle = w1.dot(v1.transpose() * (v2 * (v2.transpose() * phi_p) - phi_p));
  CHECK(std::abs(oracle) > 0.0);

  const double scale = reduced_energy_gradient(rom, y).norm() * rom_rhs(rom, y).norm();
  CHECK(std::abs(energy_rate_residual(rom, y)) > 1e-6 * scale);
}

TEST_CASE("reduced lifted energy is constant along a midpoint ROM trajectory") {
  const auto spec = model_spec("sine-gordon-1d", 64);
  const auto snaps = simulate_fom(spec, std::nullopt, 0.01, 4.0, 2, SolverKind::Newton);
  const auto fom = make_wave_model(spec.kind, spec.grid);
  const auto map = default_lifting(spec.kind);
  const auto phi = cotangent_lift(snaps.get("q"), snaps.get("p"), 6);
  const auto basis = build_lifted_basis(phi, lift_snapshots(map, snaps.get("q")), 6);
  const auto rom = build_quadratic_rom(build_lifted_operators(map, fom.laplacian), basis);
  const Vector y0 = basis.project(lift_state(map, wave_initial_condition(spec.id, spec.grid)));

  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.horizon = 4.0;
  cfg.tolerance = 1e-14;
  OdeSystem sys{[&](const Vector& y) { return rom_rhs(rom, y); },
                [&](const Vector& y) { return rom_jacobian(rom, y); }, {}};
  const Trajectory traj = implicit_midpoint(sys, y0, cfg);
  const double e0 = reduced_lifted_energy(rom, y0);
  double drift = 0.0;
  for (Index c = 0; c < traj.states.cols(); ++c) {
    drift = std::max(drift, std::abs(reduced_lifted_energy(rom, traj.states.col(c)) - e0));
  }
  CHECK(drift <= 1e-10);
}

TEST_CASE("PSD Hamiltonian ROM") {
  const Index n = 24;
  const auto grid = SpatialGrid::line(n, 0.0, 6.0, Boundary::Periodic);
  for (auto kind : {ModelKind::SineGordon, ModelKind::Exponential, ModelKind::KleinGordon}) {
    const auto fom = make_wave_model(kind, grid, 0.5);

    const auto full = build_psd_rom(fom, Matrix::Identity(n, n));
    const Vector y = random_vector(2 * n);
    CHECK(rel_diff(psd_rhs(full, y), fom_rhs(fom, y)) <= 1e-14);

    const auto rom = build_psd_rom(fom, random_orthonormal(n, 5));
    CHECK((rom.d_hat - rom.d_hat.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(psd_hamiltonian(rom, Vector::Zero(10)) == doctest::Approx(double(n) * Nonlinearity{kind, 0.5}.g(0.0)));
    for (int trial = 0; trial < 5; ++trial) {
      const Vector yr = random_vector(10);
      const Vector grad = fd_gradient([&](const Vector& x) { return psd_hamiltonian(rom, x); }, yr);
      const Vector jgrad = canonical_j(5) * grad;
      const Vector f = psd_rhs(rom, yr);
      CHECK((f - jgrad).norm() <= 1e-5 * f.norm());
      Matrix fd(10, 10);
      for (Index k = 0; k < 10; ++k) {
        Vector yp = yr, ym = yr;
        yp[k] += 1e-6;
        ym[k] -= 1e-6;
        fd.col(k) = (psd_rhs(rom, yp) - psd_rhs(rom, ym)) / 2e-6;
      }
      CHECK(rel_diff(psd_jacobian(rom, yr), fd) <= 1e-6);
    }
  }
}

TEST_CASE("KGZ Galerkin ROM") {
  const auto grid = SpatialGrid::rectangle(5, 5, -2.0, 2.0, -2.0, 2.0, Boundary::Periodic);
  const SparseMatrix d = build_laplacian(grid);
  const Index n = 25;
  const auto full = build_kgz_galerkin_rom(d, Matrix::Identity(n, n), Matrix::Identity(n, n));
  const Vector y = random_vector(6 * n);
  CHECK(rel_diff(kgz_galerkin_rhs(full, y), kgz_rhs(y, d)) <= 1e-13);
  CHECK(max_abs_diff(kgz_galerkin_expand(full, y), y) == 0.0);

  const Matrix phi = random_orthonormal(n, 3), v = random_orthonormal(n, 2);
  const auto rom = build_kgz_galerkin_rom(d, phi, v);
  CHECK(rom.dim() == 16);
  const Vector yr = random_vector(16);
  const Vector yf = kgz_galerkin_expand(rom, yr);
  const Vector f = kgz_rhs(yf, d);
  Vector oracle(16);
  for (Index b = 0; b < 4; ++b) oracle.segment(3 * b, 3) = phi.transpose() * f.segment(b * n, n);
  for (Index b = 0; b < 2; ++b) oracle.segment(12 + 2 * b, 2) = v.transpose() * f.segment((4 + b) * n, n);
  CHECK(rel_diff(kgz_galerkin_rhs(rom, yr), oracle) <= 1e-12);
}
