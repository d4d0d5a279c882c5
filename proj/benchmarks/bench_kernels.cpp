#include <benchmark/benchmark.h>

#include <random>

#include "splift/harness.hpp"

using namespace splift;

namespace {

Matrix random_matrix(Index rows, Index cols) {
  static std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = u(gen);
  return m;
}

Matrix random_orthonormal(Index rows, Index cols) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rows, cols));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

// Lifted 1D sine-Gordon model with random orthonormal bases of rank r.
struct SgFixture {
  SpatialGrid grid;
  FomModel fom;
  LiftingMap map;
  LiftedModel lifted;
  BlockDiagonalBasis basis;

  SgFixture(Index n, Index r)
      : grid(SpatialGrid::line(n, -10.0, 10.0, Boundary::Periodic)),
        fom(make_wave_model(ModelKind::SineGordon, grid)),
        map(default_lifting(ModelKind::SineGordon)),
        lifted(build_lifted_operators(map, fom.laplacian)) {
    const OrthonormalBasis phi{random_orthonormal(n, r), Vector::Ones(r)};
    basis = build_lifted_basis(phi, {random_matrix(n, 2 * r), random_matrix(n, 2 * r)}, r);
  }
};

void BM_ProjectQuadratic(benchmark::State& state) {
  const SgFixture f(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(project_quadratic_sparse(f.lifted.quadratic, f.lifted.nbar, f.basis));
}
BENCHMARK(BM_ProjectQuadratic)->Args({200, 5})->Args({200, 10})->Args({1000, 10});

void BM_RomRhs(benchmark::State& state) {
  const SgFixture f(200, state.range(0));
  const auto rom = build_quadratic_rom(f.lifted, f.basis);
  const Vector y = random_matrix(rom.dim(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(rom_rhs(rom, y));
}
BENCHMARK(BM_RomRhs)->Arg(5)->Arg(10)->Arg(20);

void BM_KahanStep(benchmark::State& state) {
  const SgFixture f(200, state.range(0));
  const auto rom = build_quadratic_rom(f.lifted, f.basis);
  const Vector y = 0.1 * random_matrix(rom.dim(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(kahan_step(rom, y, 0.005));
}
BENCHMARK(BM_KahanStep)->Arg(5)->Arg(10)->Arg(20);

void BM_SpdeimRhs(benchmark::State& state) {
  const Index n = 200, r = state.range(0);
  const SgFixture f(n, r);
  const Matrix phi = random_orthonormal(n, r);
  const auto psd = build_psd_rom(f.fom, phi);
  const auto deim = build_spdeim(psd, collect_jacobian_snapshots(f.fom.nonlinearity, phi, random_matrix(r, 4 * r)),
                                 2 * r);
  const Vector y = random_matrix(2 * r, 1);
  for (auto _ : state) benchmark::DoNotOptimize(spdeim_rhs(deim, y));
}
BENCHMARK(BM_SpdeimRhs)->Arg(5)->Arg(10)->Arg(20);

void BM_PsdRhs(benchmark::State& state) {
  const Index n = 200, r = state.range(0);
  const SgFixture f(n, r);
  const auto psd = build_psd_rom(f.fom, random_orthonormal(n, r));
  const Vector y = random_matrix(2 * r, 1);
  for (auto _ : state) benchmark::DoNotOptimize(psd_rhs(psd, y));
}
BENCHMARK(BM_PsdRhs)->Arg(5)->Arg(10)->Arg(20);

}  // namespace
BENCHMARK_MAIN();
