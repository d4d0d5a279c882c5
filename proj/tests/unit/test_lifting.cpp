#include <doctest.h>

#include <numbers>

#include "splift/harness.hpp"
#include "splift/lifting.hpp"
#include "support.hpp"

using namespace splift;
using namespace testing;

namespace {

SparseMatrix periodic_laplacian(Index n, double length = 4.0) {
  return build_laplacian(SpatialGrid::line(n, 0.0, length, Boundary::Periodic));
}


}  // namespace

TEST_CASE("lift_state for sine-Gordon at special points") {
  const auto map = default_lifting(ModelKind::SineGordon);
  const Index n = 8;
  Vector y = lift_state(map, FomState{Vector::Zero(n), Vector::Zero(n), 0.0});
  REQUIRE(y.size() == 4 * n);
  CHECK(y.segment(2 * n, n).cwiseAbs().maxCoeff() == 0.0);
  CHECK(max_abs_diff(y.segment(3 * n, n), Vector::Ones(n)) <= 1e-15);

  y = lift_state(map, FomState{Vector::Constant(n, std::numbers::pi), Vector::Zero(n), 0.0});
  CHECK(max_abs_diff(y.segment(2 * n, n), Vector::Ones(n)) <= 1e-15);
  CHECK(y.segment(3 * n, n).cwiseAbs().maxCoeff() <= 1e-15);

  CHECK_THROWS_AS(lift_state(map, FomState{Vector::Zero(n), Vector::Zero(n + 1), 0.0}), InvalidArgument);
}

TEST_CASE("exponential lifting reproduces the potential sum") {
  const auto map = default_lifting(ModelKind::Exponential);
  const Vector q = random_vector(50, 3.0);
  const Vector y = lift_state(map, FomState{q, Vector::Zero(50), 0.0});
  const Vector w1 = y.segment(100, 50);
  double oracle = 0.0;
  for (Index i = 0; i < 50; ++i) oracle += std::exp(-q[i]);
  CHECK(std::abs(w1.squaredNorm() - oracle) <= 1e-12 * oracle);
}

TEST_CASE("quadratization identities over kappa sweeps") {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (double kappa : {0.3, 1.0 / std::numbers::sqrt2, 1.0, 2.0, 3.5}) {
    for (auto kind : {ModelKind::SineGordon, ModelKind::Exponential, ModelKind::KleinGordon}) {
      const double kbar = 1.7;
      const auto map = energy_quadratization(kind, kappa, kbar);
      // mu is kept out of the lifting identity for Klein-Gordon
      const Nonlinearity nl{kind, 1.0};
      for (int s = 0; s < 10000; ++s) {
        const double q = u(rng());
        const double w1 = map.tau(1, q);
        REQUIRE(std::abs(w1 * w1 - kappa * kappa * nl.g(q)) <= 1e-12 * std::max(1.0, kappa * kappa * nl.g(q)));
        if (map.k >= 2) {
          const double fnon = nl.dg(q);
          REQUIRE(std::abs(kbar * w1 * map.tau(2, q) - fnon) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("default lifting parameters") {
  const auto sg = default_lifting(ModelKind::SineGordon);
  CHECK(sg.kappa == doctest::Approx(1.0 / std::numbers::sqrt2));
  CHECK(sg.kappa_bar == 2.0);
  CHECK(sg.k == 2);
  CHECK(sg.tau(1, 0.8) == doctest::Approx(std::sin(0.4)));
  CHECK(sg.tau(2, 0.8) == doctest::Approx(std::cos(0.4)));
  const auto kg = default_lifting(ModelKind::KleinGordon);
  CHECK(kg.k == 1);
  CHECK(kg.tau(1, 1.5) == doctest::Approx(2.25));
  const auto ex = default_lifting(ModelKind::Exponential);
  CHECK(ex.k == 1);
  CHECK(ex.tau(1, 0.6) == doctest::Approx(std::exp(-0.3)));
  CHECK_THROWS_AS(default_lifting(ModelKind::KleinGordonZakharov), InvalidArgument);
  CHECK_THROWS_AS(sg.tau(3, 0.0), InvalidArgument);
}

TEST_CASE("sine-Gordon lifted operators") {
  const Index n = 16;
  const SparseMatrix d = periodic_laplacian(n);
  const auto map = default_lifting(ModelKind::SineGordon);
  const LiftedModel model = build_lifted_operators(map, d);
  REQUIRE(model.nbar == 4 * n);

  SUBCASE("B has exactly 3n entries") { CHECK(model.quadratic.size() == std::size_t(3 * n)); }

  SUBCASE("equilibrium is stationary") {
    const Vector y = lift_state(map, FomState{Vector::Zero(n), Vector::Zero(n), 0.0});
    CHECK(lifted_rhs(model, y).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("matches a hand-coded lifted vector field") {
    const Matrix dd = dense_laplacian_1d(n, 4.0 / double(n), true);
    const Vector q = random_vector(n, 2.0), p = random_vector(n);
    const Vector y = lift_state(map, FomState{q, p, 0.0});
    const Vector w1 = y.segment(2 * n, n), w2 = y.segment(3 * n, n);
    Vector expected(4 * n);
    expected.segment(0, n) = p;
    expected.segment(n, n) = dd * q - 2.0 * w1.cwiseProduct(w2);
    expected.segment(2 * n, n) = 0.5 * w2.cwiseProduct(p);
    expected.segment(3 * n, n) = -0.5 * w1.cwiseProduct(p);
    CHECK(rel_diff(lifted_rhs(model, y), expected) <= 1e-13);
    // on the lifted manifold the p equation equals the original one
    CHECK(rel_diff(lifted_rhs(model, y).segment(n, n), fom_rhs(make_wave_model(ModelKind::SineGordon,
        SpatialGrid::line(n, 0.0, 4.0, Boundary::Periodic)), stack(FomState{q, p, 0.0})).tail(n)) <= 1e-13);
  }

  SUBCASE("Jacobian matches finite differences") {
    const Vector y = random_vector(4 * n);
    Matrix fd(4 * n, 4 * n);
    for (Index k = 0; k < 4 * n; ++k) {
      Vector yp = y, ym = y;
      yp[k] += 1e-6;
      ym[k] -= 1e-6;
      fd.col(k) = (lifted_rhs(model, yp) - lifted_rhs(model, ym)) / 2e-6;
    }
    CHECK(rel_diff(Matrix(lifted_jacobian(model, y)), fd) <= 1e-6);
  }

  SUBCASE("dimension mismatch") { CHECK_THROWS_AS(lifted_rhs(model, Vector::Zero(4 * n - 1)), InvalidArgument); }
}

TEST_CASE("lifted_rhs trivial operators") {
  LiftedModel model;
  model.n = 3;
  model.nbar = 3;
  model.linear = SparseMatrix(3, 3);
  model.linear.setIdentity();
  CHECK(lifted_rhs(model, Vector::Zero(3)).cwiseAbs().maxCoeff() == 0.0);
  const Vector e1 = Vector::Unit(3, 0);
  CHECK(max_abs_diff(lifted_rhs(model, e1), e1) == 0.0);
}

TEST_CASE("lifted operator sparsity per model") {
  const Index n = 20;
  const SparseMatrix d = periodic_laplacian(n);
  CHECK(build_lifted_operators(default_lifting(ModelKind::Exponential), d).quadratic.size() == std::size_t(2 * n));
  CHECK(build_lifted_operators(default_lifting(ModelKind::KleinGordon), d).quadratic.size() == std::size_t(2 * n));
  CHECK(build_standard_lifting_sg(d).quadratic.size() == std::size_t(2 * n));
  CHECK(build_kgz_lifted_operators(d).quadratic.size() == std::size_t(6 * n));
}

TEST_CASE("lifted energy equals the original energy on the lifted manifold") {
  const Index n = 24;
  const auto grid = SpatialGrid::line(n, 0.0, 6.0, Boundary::Periodic);
  const SparseMatrix d = build_laplacian(grid);
  for (auto kind : {ModelKind::SineGordon, ModelKind::Exponential, ModelKind::KleinGordon}) {
    const double mu = 0.6;
    const auto fom = make_wave_model(kind, grid, mu);
    const auto map = default_lifting(kind, mu);
    const LiftedModel model = build_lifted_operators(map, d);
    for (int trial = 0; trial < 100; ++trial) {
      const FomState s{random_vector(n, 2.0), random_vector(n), 0.0};
      const Vector y = lift_state(map, s);
      const double e = fom_energy(fom, s);
      REQUIRE(std::abs(lifted_energy(model, y) - e) <= 1e-12 * std::abs(e));
      const Vector f = lifted_rhs(model, y);
      const Vector grad = lifted_energy_gradient(model, y);
      REQUIRE(std::abs(grad.dot(f)) <= 1e-10 * grad.norm() * f.norm());
    }
  }
  CHECK(lifted_energy(build_lifted_operators(default_lifting(ModelKind::SineGordon), d), Vector::Zero(4 * n)) == 0.0);
}

TEST_CASE("standard sine-Gordon lifting") {
  const Index n = 24;
  const auto grid = SpatialGrid::line(n, 0.0, 6.0, Boundary::Periodic);
  const LiftedModel model = build_standard_lifting_sg(build_laplacian(grid));
  const auto map = standard_lifting_sg();
  const Vector y0 = lift_state(map, FomState{Vector::Zero(n), Vector::Zero(n), 0.0});
  CHECK(y0.segment(2 * n, n).cwiseAbs().maxCoeff() == 0.0);
  CHECK(max_abs_diff(y0.segment(3 * n, n), Vector::Ones(n)) == 0.0);
  CHECK(std::abs(lifted_energy(model, y0)) <= 1e-13);

  const auto fom = make_wave_model(ModelKind::SineGordon, grid);
  for (int trial = 0; trial < 100; ++trial) {
    const FomState s{random_vector(n, 2.0), random_vector(n), 0.0};
    const double e = fom_energy(fom, s);
    REQUIRE(std::abs(lifted_energy(model, lift_state(map, s)) - e) <= 1e-12 * std::abs(e));
  }
}

TEST_CASE("KGZ lifting") {
  const auto grid = SpatialGrid::rectangle(6, 6, -3.0, 3.0, -3.0, 3.0, Boundary::Periodic);
  const SparseMatrix d = build_laplacian(grid);
  const LiftedModel model = build_kgz_lifted_operators(d);
  const Index n = 36;
  REQUIRE(model.nbar == 7 * n);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector y = random_vector(6 * n, 0.5);
    const KgzState s = unstack_kgz(y);
    const Vector ybar = lift_state(s);
    CHECK(max_abs_diff(ybar.tail(n), s.q1.cwiseAbs2() + s.q2.cwiseAbs2()) == 0.0);
    CHECK(rel_diff(lifted_rhs(model, ybar).head(6 * n), kgz_rhs(y, d)) <= 1e-12);
    const double e = kgz_energy(y, d);
    CHECK(std::abs(lifted_energy(model, ybar) - e) <= 1e-12 * std::max(1.0, std::abs(e)));
    const Vector f = lifted_rhs(model, ybar);
    const Vector grad = lifted_energy_gradient(model, ybar);
    CHECK(std::abs(grad.dot(f)) <= 1e-10 * grad.norm() * f.norm());
  }
  const Matrix q1 = random_matrix(n, 3), q2 = random_matrix(n, 3);
  CHECK(max_abs_diff(lift_kgz_snapshots(q1, q2), q1.cwiseAbs2() + q2.cwiseAbs2()) == 0.0);
}

TEST_CASE("lifted and original sine-Gordon trajectories agree") {
  const Index n = 32;
  const auto grid = SpatialGrid::line(n, -16.0, 16.0, Boundary::Periodic);
  const auto fom = make_wave_model(ModelKind::SineGordon, grid);
  const auto map = default_lifting(ModelKind::SineGordon);
  const LiftedModel lifted = build_lifted_operators(map, fom.laplacian);

  Vector q0(n);
  for (Index i = 0; i < n; ++i) q0[i] = 0.5 * std::exp(-0.25 * grid.x(i) * grid.x(i));
  const FomState s0{q0, Vector::Zero(n), 0.0};

  IntegratorConfig cfg;
  cfg.dt = 0.005;
  cfg.horizon = 5.0;
  cfg.stride = 20;
  const Trajectory a = implicit_midpoint(fom_system(fom), stack(s0), cfg);
  const Trajectory b = implicit_midpoint(lifted_system(lifted), lift_state(map, s0), cfg);
  REQUIRE(a.states.cols() == b.states.cols());
  double worst = 0.0;
  for (Index c = 0; c < a.states.cols(); ++c) {
    const Vector qa = a.states.col(c).head(n), qb = b.states.col(c).head(n);
    worst = std::max(worst, (qa - qb).norm() / qa.norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("snapshot lifting applies tau entrywise") {
  const auto map = default_lifting(ModelKind::SineGordon);
  const Matrix q = random_matrix(10, 4, 3.0);
  const auto w = lift_snapshots(map, q);
  REQUIRE(w.size() == 2);
  for (Index i = 0; i < 10; ++i)
    for (Index j = 0; j < 4; ++j) {
      CHECK(w[0](i, j) == doctest::Approx(std::sin(0.5 * q(i, j))));
      CHECK(w[1](i, j) == doctest::Approx(std::cos(0.5 * q(i, j))));
    }
}
