#include "splift/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "splift/io.hpp"

namespace splift {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string mu_tag(const char* prefix, double mu) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_mu%.4f", prefix, mu);
  return buf;
}

std::string path_name(const MethodSpec& m) {
  std::string s = m.name();
  std::replace(s.begin(), s.end(), '(', '-');
  s.erase(std::remove(s.begin(), s.end(), ')'), s.end());
  return s;
}

std::string cell_dir(const MethodSpec& m, Index r) { return path_name(m) + "_r" + std::to_string(r); }

Matrix hcat(const std::vector<const Matrix*>& parts) {
  Index cols = 0;
  for (const Matrix* m : parts) cols += m->cols();
  Matrix out(parts.front()->rows(), cols);
  Index c = 0;
  for (const Matrix* m : parts) {
    out.middleCols(c, m->cols()) = *m;
    c += m->cols();
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Matrix row_matrix(const std::vector<double>& v) {
  Matrix m(1, Index(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, Index(i)) = v[i];
  return m;
}

std::vector<double> row_values(const Matrix& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

Matrix column_matrix(const Vector& v) { return Matrix(v); }

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("stage '") + name + "' failed: " + e.what());
  }
}

}  // namespace

OdeSystem fom_system(const FomModel& model) {
  OdeSystem s;
  s.rhs = [&model](const Vector& y) { return fom_rhs(model, y); };
  s.sparse_jacobian = [&model](const Vector& y) { return fom_jacobian(model, y); };
  return s;
}

OdeSystem kgz_system(const SparseMatrix& laplacian) {
  OdeSystem s;
  s.rhs = [&laplacian](const Vector& y) { return kgz_rhs(y, laplacian); };
  s.sparse_jacobian = [&laplacian](const Vector& y) { return kgz_jacobian(y, laplacian); };
  return s;
}

OdeSystem lifted_system(const LiftedModel& model) {
  OdeSystem s;
  s.rhs = [&model](const Vector& y) { return lifted_rhs(model, y); };
  s.sparse_jacobian = [&model](const Vector& y) { return lifted_jacobian(model, y); };
  return s;
}

SnapshotSet simulate_fom(const ModelSpec& spec, std::optional<double> mu, double dt, double horizon,
                         Index stride, SolverKind solver, double* wall_seconds) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.stride = stride;
  cfg.solver = solver;
  SnapshotSet out;
  out.model_id = spec.id;
  out.mu = mu;
  const Index n = spec.grid.size();
  const auto start = Clock::now();
  if (spec.kind == ModelKind::KleinGordonZakharov) {
    cfg.solver = SolverKind::Picard;
    const SparseMatrix d = build_laplacian(spec.grid);
    const Trajectory traj = implicit_midpoint(kgz_system(d), stack(kgz_initial_condition(spec.grid)), cfg);
    out.times = traj.times;
    const char* names[] = {"q1", "q2", "p1", "p2", "varphi", "phi"};
    for (Index b = 0; b < 6; ++b) out.add(names[b], traj.states.middleRows(b * n, n));
  } else {
    const FomModel model = make_wave_model(spec.kind, spec.grid, mu.value_or(1.0));
    const FomState ic = wave_initial_condition(spec.id, spec.grid);
    const Trajectory traj = implicit_midpoint(fom_system(model), stack(ic), cfg);
    out.times = traj.times;
    out.add("q", traj.states.topRows(n));
    out.add("p", traj.states.bottomRows(n));
  }
  if (wall_seconds) *wall_seconds = seconds_since(start);
  return out;
}

OrthonormalBasis leading(const OrthonormalBasis& basis, Index r) {
  require(r <= basis.rank(), "leading: requested rank exceeds stored basis");
  return OrthonormalBasis{basis.vectors.leftCols(r), basis.singular_values};
}

Index ReducedModel::dim() const {
  return std::visit([](const auto& m) { return m.dim(); }, rom);
}

std::string ReducedModel::dim_label() const {
  const Index d = dim();
  return std::to_string(r > 0 ? d / r : 0) + "r";
}

Matrix ReducedModel::reconstruct(const std::string& field, const Matrix& states) const {
  const Index offset = [&]() -> Index {
    if (field == "q" || field == "q1") return 0;
    if (field == "p" || field == "q2") return r;
    if (field == "p1") return 2 * r;
    if (field == "p2") return 3 * r;
    if (field == "varphi") return 4 * r;
    if (field == "phi") return 5 * r;
    throw InvalidArgument("reconstruct: unknown field '" + field + "'");
  }();
  const bool kgz_field = field == "varphi" || field == "phi";
  const Matrix& basis = kgz_field ? field_basis : phi;
  return basis * states.middleRows(offset, r);
}

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {
  config_.validate();
  spec_ = model_spec(config_.model_id, config_.nx);
  laplacian_ = build_laplacian(spec_.grid);
  stride_ = config_.effective_stride(spec_.grid.size());
  for (double t : {config_.train_end, config_.test_end}) {
    require(std::llround(t / config_.dt) % stride_ == 0, "config: horizons must be whole multiples of stride * dt");
  }
  if (is_kgz()) {
    require(!config_.parametric(), "config: kgz-2d has no parameter");
  }
  auto add_case = [&](std::string tag, std::optional<double> mu, bool training) {
    Case c;
    c.tag = std::move(tag);
    c.mu = mu;
    c.training = training;
    if (!is_kgz()) c.model = make_wave_model(spec_.kind, spec_.grid, mu.value_or(1.0));
    cases_.push_back(std::move(c));
  };
  if (config_.parametric()) {
    for (double mu : config_.mu_train) add_case(mu_tag("train", mu), mu, true);
    for (double mu : config_.mu_test) add_case(mu_tag("test", mu), mu, false);
  } else {
    add_case("base", std::nullopt, true);
  }
}

Index Experiment::train_columns() const {
  const Index steps = Index(std::llround(config_.train_end / config_.dt));
  return steps / stride_ + 1;
}

LiftingMap Experiment::lifting_for(const MethodSpec& method, const Case& c) const {
  if (method.kind == MethodSpec::Kind::StandardLifting) return standard_lifting_sg();
  return default_lifting(spec_.kind, c.mu.value_or(1.0));
}

Matrix Experiment::training_matrix(const std::string& field) const {
  const Index k = train_columns();
  std::vector<Matrix> parts;
  for (const auto& c : cases_) {
    if (!c.training) continue;
    require(c.fom.columns() >= k, "training_matrix: FOM run shorter than the training window");
    parts.push_back(c.fom.get(field).leftCols(k));
  }
  std::vector<const Matrix*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  return hcat(ptrs);
}

void Experiment::simulate_fom() {
  stage("simulate-fom", [&] {
    offline_.fom_seconds = 0.0;
    for (auto& c : cases_) {
      double wall = 0.0;
      c.fom = splift::simulate_fom(spec_, c.mu, config_.dt, config_.test_end, stride_, config_.fom_solver, &wall);
      offline_.fom_seconds += wall;
    }
    return 0;
  });
}

void Experiment::build_bases() {
  stage("build-basis", [&] {
    const Index r_max = config_.r_max();
    bases_ = BasisSet{};
    auto wants = [&](MethodSpec::Kind kind) {
      return std::any_of(config_.methods.begin(), config_.methods.end(),
                         [&](const MethodSpec& m) { return m.kind == kind; });
    };
    auto start = Clock::now();
    if (is_kgz()) {
      const Matrix q1 = training_matrix("q1"), q2 = training_matrix("q2");
      const Matrix p1 = training_matrix("p1"), p2 = training_matrix("p2");
      const Matrix varphi = training_matrix("varphi"), phi = training_matrix("phi");
      bases_.phi = truncated_svd(hcat({&q1, &q2, &p1, &p2}), r_max);
      if (wants(MethodSpec::Kind::Psd)) bases_.field = truncated_svd(hcat({&varphi, &phi}), r_max);
      offline_.pod_seconds = seconds_since(start);
      if (wants(MethodSpec::Kind::Lifting)) {
        start = Clock::now();
        const Matrix w = lift_kgz_snapshots(q1, q2);
        bases_.joint = truncated_svd(hcat({&phi, &varphi, &w}), r_max);
        offline_.lifting_seconds = seconds_since(start);
      }
      return 0;
    }

    const Matrix q = training_matrix("q"), p = training_matrix("p");
    bases_.phi = cotangent_lift(q, p, r_max);
    offline_.pod_seconds = seconds_since(start);

    const Case& first = cases_.front();
    if (wants(MethodSpec::Kind::Lifting)) {
      start = Clock::now();
      for (const Matrix& w : lift_snapshots(lifting_for(MethodSpec{}, first), q)) {
        bases_.aux.push_back(truncated_svd(w, r_max));
      }
      offline_.lifting_seconds = seconds_since(start);
    }
    if (wants(MethodSpec::Kind::StandardLifting)) {
      MethodSpec standard;
      standard.kind = MethodSpec::Kind::StandardLifting;
      for (const Matrix& w : lift_snapshots(lifting_for(standard, first), q)) {
        bases_.aux_standard.push_back(truncated_svd(w, r_max));
      }
    }
    if (wants(MethodSpec::Kind::Spdeim)) {
      start = Clock::now();
      const Index k = train_columns();
      for (Index r : config_.r_values) {
        Index m_max = 0;
        for (const auto& m : config_.methods) {
          if (m.kind == MethodSpec::Kind::Spdeim) m_max = std::max(m_max, m.deim_rank(r));
        }
        const Matrix phi_r = bases_.phi.vectors.leftCols(r);
        std::vector<Matrix> blocks;
        for (const auto& c : cases_) {
          if (!c.training) continue;
          const Matrix reduced_q = phi_r.transpose() * c.fom.get("q").leftCols(k);
          blocks.push_back(collect_jacobian_snapshots(c.model.nonlinearity, phi_r, reduced_q));
        }
        std::vector<const Matrix*> ptrs;
        for (const auto& b : blocks) ptrs.push_back(&b);
        bases_.deim.push_back(truncated_svd(hcat(ptrs), m_max).vectors);
      }
      offline_.spdeim_seconds = seconds_since(start);
    }
    return 0;
  });
}

ReducedModel Experiment::build_rom(const MethodSpec& method, Index r, Index r_index, const Case& c) const {
  ReducedModel out;
  out.method = method;
  out.r = r;
  out.phi = bases_.phi.vectors.leftCols(r);
  const Matrix& phi = out.phi;

  if (is_kgz()) {
    const KgzState ic = kgz_initial_condition(spec_.grid);
    if (method.kind == MethodSpec::Kind::Psd) {
      out.field_basis = bases_.field.vectors.leftCols(r);
      KgzGalerkinRom rom = build_kgz_galerkin_rom(laplacian_, phi, out.field_basis);
      Vector y0(rom.dim());
      y0 << phi.transpose() * ic.q1, phi.transpose() * ic.q2, phi.transpose() * ic.p1,
          phi.transpose() * ic.p2, out.field_basis.transpose() * ic.varphi,
          out.field_basis.transpose() * ic.phi;
      out.y0 = y0;
      out.rom = std::move(rom);
    } else if (method.kind == MethodSpec::Kind::Lifting) {
      out.field_basis = bases_.joint.vectors.leftCols(r);
      const OrthonormalBasis pb{phi, {}}, jb{out.field_basis, {}};
      BlockDiagonalBasis basis;
      for (const char* label : {"q1", "q2", "p1", "p2"}) basis.blocks.push_back({label, pb});
      for (const char* label : {"varphi", "phi", "w"}) basis.blocks.push_back({label, jb});
      const LiftedModel lifted = build_kgz_lifted_operators(laplacian_);
      out.y0 = basis.project(lift_state(ic));
      out.rom = build_quadratic_rom(lifted, basis);
    } else {
      throw InvalidArgument("method " + method.name() + " is not available for kgz-2d");
    }
    return out;
  }

  const FomState ic = wave_initial_condition(spec_.id, spec_.grid);
  switch (method.kind) {
    case MethodSpec::Kind::Psd: {
      out.rom = build_psd_rom(c.model, phi);
      Vector y0(2 * r);
      y0 << phi.transpose() * ic.q, phi.transpose() * ic.p;
      out.y0 = y0;
      break;
    }
    case MethodSpec::Kind::Spdeim: {
      const HamiltonianRom psd = build_psd_rom(c.model, phi);
      const Index m = method.deim_rank(r);
      const Matrix& deim = bases_.deim.at(std::size_t(r_index));
      require(m <= deim.cols(), "spdeim: DEIM rank exceeds the available DEIM basis");
      out.rom = build_deim_model(psd, deim.leftCols(m));
      Vector y0(2 * r);
      y0 << phi.transpose() * ic.q, phi.transpose() * ic.p;
      out.y0 = y0;
      break;
    }
    case MethodSpec::Kind::Lifting:
    case MethodSpec::Kind::StandardLifting: {
      const bool standard = method.kind == MethodSpec::Kind::StandardLifting;
      const LiftingMap map = lifting_for(method, c);
      const auto& aux = standard ? bases_.aux_standard : bases_.aux;
      const OrthonormalBasis pb{phi, {}};
      BlockDiagonalBasis basis;
      basis.blocks.push_back({"q", pb});
      basis.blocks.push_back({"p", pb});
      for (std::size_t j = 0; j < aux.size(); ++j) {
        basis.blocks.push_back({"w" + std::to_string(j + 1), leading(aux[j], r)});
      }
      const LiftedModel lifted = standard ? build_standard_lifting_sg(c.model.laplacian)
                                          : build_lifted_operators(map, c.model.laplacian);
      out.y0 = basis.project(lift_state(map, ic));
      out.rom = build_quadratic_rom(lifted, basis);
      break;
    }
  }
  return out;
}

void Experiment::build_roms() {
  stage("build-rom", [&] {
    cells_.clear();
    offline_.projection_seconds = 0.0;
    for (const auto& method : config_.methods) {
      for (std::size_t ri = 0; ri < config_.r_values.size(); ++ri) {
        Cell cell;
        cell.method = method;
        cell.r = config_.r_values[ri];
        for (const auto& c : cases_) {
          const auto start = Clock::now();
          cell.roms.push_back(build_rom(method, cell.r, Index(ri), c));
          if (cell.roms.back().has_lifted_energy()) offline_.projection_seconds += seconds_since(start);
        }
        cells_.push_back(std::move(cell));
      }
    }
    return 0;
  });
}

Trajectory Experiment::integrate(const ReducedModel& model, const Vector& y0, double horizon) const {
  IntegratorConfig cfg;
  cfg.dt = config_.dt;
  cfg.horizon = horizon;
  cfg.stride = stride_;
  cfg.tolerance = config_.rom_tolerance;
  return std::visit(
      [&](const auto& rom) -> Trajectory {
        using T = std::decay_t<decltype(rom)>;
        OdeSystem sys;
        if constexpr (std::is_same_v<T, HamiltonianRom>) {
          sys.rhs = [&rom](const Vector& y) { return psd_rhs(rom, y); };
          sys.dense_jacobian = [&rom](const Vector& y) { return psd_jacobian(rom, y); };
        } else if constexpr (std::is_same_v<T, DeimModel>) {
          sys.rhs = [&rom](const Vector& y) { return spdeim_rhs(rom, y); };
          sys.dense_jacobian = [&rom](const Vector& y) { return spdeim_jacobian(rom, y); };
        } else if constexpr (std::is_same_v<T, QuadraticRom>) {
          if (config_.lifting_integrator == RomIntegrator::Kahan) return kahan(rom, y0, cfg);
          sys.rhs = [&rom](const Vector& y) { return rom_rhs(rom, y); };
          sys.dense_jacobian = [&rom](const Vector& y) { return rom_jacobian(rom, y); };
        } else {
          sys.rhs = [&rom](const Vector& y) { return kgz_galerkin_rhs(rom, y); };
          cfg.solver = SolverKind::Picard;
        }
        return implicit_midpoint(sys, y0, cfg);
      },
      model.rom);
}

void Experiment::run_roms() {
  stage("run-rom", [&] {
    for (auto& cell : cells_) {
      cell.trajectories.assign(cell.roms.size(), Trajectory{});
      cell.wall_seconds.assign(cell.roms.size(), 0.0);
      cell.failures.assign(cell.roms.size(), std::string());
      for (std::size_t ci = 0; ci < cell.roms.size(); ++ci) {
        const double horizon = config_.test_end;
        std::vector<double> walls;
        try {
          for (int rep = 0; rep < config_.timing_repeats; ++rep) {
            const auto start = Clock::now();
            Trajectory traj = integrate(cell.roms[ci], cell.roms[ci].y0, horizon);
            walls.push_back(seconds_since(start));
            if (rep == 0) cell.trajectories[ci] = std::move(traj);
          }
          cell.wall_seconds[ci] = median(walls);
        } catch (const NumericalError& e) {
          cell.failures[ci] = e.what();
          cell.trajectories[ci] = Trajectory{};
        }
      }
    }
    return 0;
  });
}

std::vector<double> Experiment::fom_energy_series(const ReducedModel& rom, const Case& c,
                                                  const Trajectory& traj) const {
  if (!is_kgz()) return fom_energy_error(c.model, rom.phi, traj.states.topRows(2 * rom.r));
  std::vector<double> energy;
  const Index n = spec_.grid.size();
  Matrix full(6 * n, traj.states.cols());
  const char* names[] = {"q1", "q2", "p1", "p2", "varphi", "phi"};
  for (Index b = 0; b < 6; ++b) full.middleRows(b * n, n) = rom.reconstruct(names[b], traj.states);
  for (Index k = 0; k < full.cols(); ++k) energy.push_back(kgz_energy(Vector(full.col(k)), laplacian_));
  return drift_series(energy);
}

std::vector<double> Experiment::lifted_energy_series(const ReducedModel& rom, const Trajectory& traj) const {
  const auto* q = std::get_if<QuadraticRom>(&rom.rom);
  if (!q) return {};
  std::vector<double> energy;
  for (Index k = 0; k < traj.states.cols(); ++k) energy.push_back(reduced_lifted_energy(*q, traj.states.col(k)));
  return drift_series(energy);
}

namespace {

struct FieldError {
  double num = 0.0;
  double den = 0.0;
};

// Squared-Frobenius numerator and denominator over columns [first, last).
FieldError field_error(const Matrix& reference, const Matrix& approx, Index first, Index last) {
  const Index cols = last - first;
  return {(reference.middleCols(first, cols) - approx.middleCols(first, cols)).squaredNorm(),
          reference.middleCols(first, cols).squaredNorm()};
}

double max_in(const std::vector<double>& v, Index first, Index last) {
  double m = 0.0;
  for (Index k = first; k < last && k < Index(v.size()); ++k) m = std::max(m, v[std::size_t(k)]);
  return m;
}

struct CaseErrors {
  double q = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  double phi = std::numeric_limits<double>::quiet_NaN();
  double energy = std::numeric_limits<double>::quiet_NaN();
  double lifted = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace

std::vector<MetricReport> Experiment::compute_metrics() const {
  return stage("metrics", [&] {
    std::vector<MetricReport> reports;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const Index k_train = train_columns();
    for (const auto& cell : cells_) {
      require(cell.trajectories.size() == cases_.size(), "metrics: missing ROM trajectories");
      MetricReport rep;
      rep.model = spec_.id;
      rep.method = cell.method.name();
      rep.r = cell.r;
      rep.reduced_dim = cell.roms.front().dim();
      rep.dim_label = cell.roms.front().dim_label();

      // errors per case over a column window
      auto case_errors = [&](std::size_t ci, Index first, Index last) {
        CaseErrors e;
        const auto& traj = cell.trajectories[ci];
        if (!cell.failures[ci].empty() || traj.states.cols() == 0) return e;
        const auto& rom = cell.roms[ci];
        const auto& fom = cases_[ci].fom;
        auto combined = [&](std::initializer_list<const char*> fields) {
          FieldError total;
          for (const char* f : fields) {
            const FieldError fe = field_error(fom.get(f), rom.reconstruct(f, traj.states), first, last);
            total.num += fe.num;
            total.den += fe.den;
          }
          return total.den > 0.0 ? total.num / total.den : nan;
        };
        if (is_kgz()) {
          e.q = combined({"q1", "q2"});
          e.p = combined({"p1", "p2"});
          e.phi = combined({"phi"});
        } else {
          e.q = combined({"q"});
          e.p = combined({"p"});
        }
        e.energy = max_in(fom_energy_series(rom, cases_[ci], traj), first, last);
        e.lifted = rom.has_lifted_energy() ? max_in(lifted_energy_series(rom, traj), first, last) : nan;
        return e;
      };

      auto regime = [&](const std::string& name, const std::vector<std::pair<std::size_t, std::pair<Index, Index>>>& parts) {
        MetricReport::Regime g;
        g.name = name;
        std::vector<double> eq, ep, ephi;
        double energy = 0.0, lifted = 0.0;
        bool failed = false;
        for (const auto& [ci, range] : parts) {
          const CaseErrors e = case_errors(ci, range.first, range.second);
          if (std::isnan(e.q)) failed = true;
          eq.push_back(e.q);
          ep.push_back(e.p);
          ephi.push_back(e.phi);
          energy = std::max(energy, e.energy);
          lifted = std::max(lifted, e.lifted);
        }
        g.error_q = failed ? nan : average_relative_state_error(eq);
        g.error_p = failed ? nan : average_relative_state_error(ep);
        if (is_kgz()) g.error_phi = failed ? nan : average_relative_state_error(ephi);
        g.max_energy_error = failed ? nan : energy;
        g.max_lifted_energy_drift = cell.roms.front().has_lifted_energy() && !failed ? lifted : nan;
        return g;
      };

      std::vector<std::pair<std::size_t, std::pair<Index, Index>>> train, test;
      for (std::size_t ci = 0; ci < cases_.size(); ++ci) {
        const Index k = cases_[ci].fom.columns();
        if (config_.parametric()) {
          (cases_[ci].training ? train : test).push_back({ci, {0, std::min(k, k_train)}});
        } else {
          train.push_back({ci, {0, k_train}});
          if (k > k_train) test.push_back({ci, {k_train, k}});
        }
      }
      rep.regimes.push_back(regime("train", train));
      if (!test.empty()) rep.regimes.push_back(regime("test", test));

      for (const auto& f : cell.failures) {
        if (!f.empty()) {
          rep.failed = true;
          rep.failure = f;
        }
      }
      double wall = 0.0;
      for (double w : cell.wall_seconds) wall += w;
      rep.wall_seconds = cell.wall_seconds.empty() ? 0.0 : wall / double(cell.wall_seconds.size());
      if (!rep.failed && rep.wall_seconds > 0.0) rep.efficacy = efficacy(rep.regimes.front().error_q, rep.wall_seconds);
      reports.push_back(std::move(rep));
    }
    return reports;
  });
}

// ---------------------------------------------------------------------------
// persistence

void Experiment::save_fom(const fs::path& dir) const {
  for (const auto& c : cases_) {
    const fs::path d = dir / "fom" / c.tag;
    fs::create_directories(d);
    save_matrix(d / "times.splm", row_matrix(c.fom.times));
    for (const auto& [name, data] : c.fom.fields) save_matrix(d / (name + ".splm"), data);
  }
}

void Experiment::load_fom(const fs::path& dir) {
  stage("load-fom", [&] {
    const std::vector<std::string> wave = {"q", "p"};
    const std::vector<std::string> kgz = {"q1", "q2", "p1", "p2", "varphi", "phi"};
    for (auto& c : cases_) {
      const fs::path d = dir / "fom" / c.tag;
      SnapshotSet s;
      s.model_id = spec_.id;
      s.mu = c.mu;
      s.times = row_values(load_matrix(d / "times.splm"));
      for (const auto& f : is_kgz() ? kgz : wave) s.add(f, load_matrix(d / (f + ".splm")));
      require(s.rows() == spec_.grid.size(), "load-fom: snapshot rows do not match the configured grid");
      c.fom = std::move(s);
    }
    return 0;
  });
}

namespace {

void save_basis(const fs::path& dir, const std::string& name, const OrthonormalBasis& b) {
  if (b.vectors.size() == 0) return;
  save_matrix(dir / (name + ".splm"), b.vectors);
  save_matrix(dir / (name + "_sv.splm"), column_matrix(b.singular_values));
}

OrthonormalBasis load_basis(const fs::path& dir, const std::string& name) {
  if (!fs::exists(dir / (name + ".splm"))) return {};
  return OrthonormalBasis{load_matrix(dir / (name + ".splm")), load_matrix(dir / (name + "_sv.splm")).col(0)};
}

}  // namespace

void Experiment::save_bases(const fs::path& dir) const {
  const fs::path d = dir / "basis";
  fs::create_directories(d);
  save_basis(d, "phi", bases_.phi);
  for (std::size_t j = 0; j < bases_.aux.size(); ++j) save_basis(d, "aux" + std::to_string(j + 1), bases_.aux[j]);
  for (std::size_t j = 0; j < bases_.aux_standard.size(); ++j) {
    save_basis(d, "standard_aux" + std::to_string(j + 1), bases_.aux_standard[j]);
  }
  save_basis(d, "joint", bases_.joint);
  save_basis(d, "field", bases_.field);
  for (std::size_t i = 0; i < bases_.deim.size(); ++i) {
    save_matrix(d / ("deim_r" + std::to_string(config_.r_values[i]) + ".splm"), bases_.deim[i]);
  }
  save_matrix(d / "offline_seconds.splm",
              row_matrix({offline_.fom_seconds, offline_.pod_seconds, offline_.lifting_seconds,
                          offline_.projection_seconds, offline_.spdeim_seconds}));
}

void Experiment::load_bases(const fs::path& dir) {
  stage("load-basis", [&] {
    const fs::path d = dir / "basis";
    bases_ = BasisSet{};
    bases_.phi = load_basis(d, "phi");
    require(bases_.phi.rank() >= config_.r_max(), "load-basis: stored basis rank is below r_max");
    for (int j = 1;; ++j) {
      OrthonormalBasis b = load_basis(d, "aux" + std::to_string(j));
      if (b.rank() == 0) break;
      bases_.aux.push_back(std::move(b));
    }
    for (int j = 1;; ++j) {
      OrthonormalBasis b = load_basis(d, "standard_aux" + std::to_string(j));
      if (b.rank() == 0) break;
      bases_.aux_standard.push_back(std::move(b));
    }
    bases_.joint = load_basis(d, "joint");
    bases_.field = load_basis(d, "field");
    for (Index r : config_.r_values) {
      const fs::path p = d / ("deim_r" + std::to_string(r) + ".splm");
      if (!fs::exists(p)) break;
      bases_.deim.push_back(load_matrix(p));
    }
    const fs::path costs = d / "offline_seconds.splm";
    if (fs::exists(costs)) {
      const auto v = row_values(load_matrix(costs));
      if (v.size() == 5) offline_ = OfflineCosts{v[0], v[1], v[2], v[3], v[4]};
    }
    return 0;
  });
}

void Experiment::save_roms(const fs::path& dir) const {
  for (const auto& cell : cells_) {
    for (std::size_t ci = 0; ci < cell.roms.size(); ++ci) {
      const fs::path d = dir / "rom" / cell_dir(cell.method, cell.r) / cases_[ci].tag;
      fs::create_directories(d);
      const ReducedModel& m = cell.roms[ci];
      save_matrix(d / "y0.splm", column_matrix(m.y0));
      std::visit(
          [&](const auto& rom) {
            using T = std::decay_t<decltype(rom)>;
            if constexpr (std::is_same_v<T, HamiltonianRom>) {
              save_matrix(d / "d_hat.splm", rom.d_hat);
            } else if constexpr (std::is_same_v<T, DeimModel>) {
              save_matrix(d / "deim_basis.splm", rom.basis);
              save_matrix(d / "phi_rows.splm", rom.phi_rows);
              save_matrix(d / "weights.splm", column_matrix(rom.weights));
              Matrix idx(Index(rom.indices.size()), 1);
              for (std::size_t a = 0; a < rom.indices.size(); ++a) idx(Index(a), 0) = double(rom.indices[a]);
              save_matrix(d / "indices.splm", idx);
              save_matrix(d / "d_hat.splm", rom.d_hat);
            } else if constexpr (std::is_same_v<T, QuadraticRom>) {
              save_matrix(d / "Ar.splm", rom.Ar);
              save_matrix(d / "Br.splm", rom.Br);
              save_matrix(d / "energy_hessian.splm", rom.energy_hessian);
              save_matrix(d / "energy_linear.splm", column_matrix(rom.energy_linear));
              Matrix c(1, 1);
              c(0, 0) = rom.energy_constant;
              save_matrix(d / "energy_constant.splm", c);
              Matrix dims(1, Index(rom.block_dims.size()));
              for (std::size_t b = 0; b < rom.block_dims.size(); ++b) dims(0, Index(b)) = double(rom.block_dims[b]);
              save_matrix(d / "block_dims.splm", dims);
            } else {
              save_matrix(d / "d1.splm", rom.d1);
              save_matrix(d / "d2.splm", rom.d2);
            }
          },
          m.rom);
    }
  }
}

void Experiment::load_roms(const fs::path& dir) {
  stage("load-rom", [&] {
    cells_.clear();
    for (const auto& method : config_.methods) {
      for (Index r : config_.r_values) {
        Cell cell;
        cell.method = method;
        cell.r = r;
        for (const auto& c : cases_) {
          const fs::path d = dir / "rom" / cell_dir(method, r) / c.tag;
          ReducedModel m;
          m.method = method;
          m.r = r;
          m.phi = bases_.phi.vectors.leftCols(r);
          m.y0 = load_matrix(d / "y0.splm").col(0);
          if (is_kgz()) {
            if (method.kind == MethodSpec::Kind::Psd) {
              m.field_basis = bases_.field.vectors.leftCols(r);
              KgzGalerkinRom rom;
              rom.phi = m.phi;
              rom.v = m.field_basis;
              rom.d1 = load_matrix(d / "d1.splm");
              rom.d2 = load_matrix(d / "d2.splm");
              m.rom = std::move(rom);
            } else {
              m.field_basis = bases_.joint.vectors.leftCols(r);
            }
          } else if (method.kind == MethodSpec::Kind::Psd) {
            HamiltonianRom rom;
            rom.model = &c.model;
            rom.phi = m.phi;
            rom.d_hat = load_matrix(d / "d_hat.splm");
            m.rom = std::move(rom);
          } else if (method.kind == MethodSpec::Kind::Spdeim) {
            HamiltonianRom psd;
            psd.model = &c.model;
            psd.phi = m.phi;
            psd.d_hat = load_matrix(d / "d_hat.splm");
            m.rom = build_deim_model(psd, load_matrix(d / "deim_basis.splm"));
          }
          if (method.kind == MethodSpec::Kind::Lifting || method.kind == MethodSpec::Kind::StandardLifting) {
            QuadraticRom rom;
            rom.Ar = load_matrix(d / "Ar.splm");
            rom.Br = load_matrix(d / "Br.splm");
            rom.energy_hessian = load_matrix(d / "energy_hessian.splm");
            rom.energy_linear = load_matrix(d / "energy_linear.splm").col(0);
            rom.energy_constant = load_matrix(d / "energy_constant.splm")(0, 0);
            for (double v : row_values(load_matrix(d / "block_dims.splm"))) rom.block_dims.push_back(Index(v));
            rom.br_blocks = compress_quadratic(rom.Br, rom.block_dims);
            m.rom = std::move(rom);
          }
          require(m.y0.size() == m.dim(), "load-rom: initial state does not match the ROM dimension");
          cell.roms.push_back(std::move(m));
        }
        cells_.push_back(std::move(cell));
      }
    }
    return 0;
  });
}

void Experiment::save_trajectories(const fs::path& dir) const {
  for (const auto& cell : cells_) {
    const fs::path d = dir / "traj" / cell_dir(cell.method, cell.r);
    fs::create_directories(d);
    for (std::size_t ci = 0; ci < cell.trajectories.size(); ++ci) {
      const fs::path base = d / cases_[ci].tag;
      if (!cell.failures[ci].empty()) {
        std::ofstream(base.string() + ".failed") << cell.failures[ci] << "\n";
        continue;
      }
      fs::remove(base.string() + ".failed");
      save_matrix(base.string() + ".splm", cell.trajectories[ci].states);
      save_matrix(base.string() + "_times.splm", row_matrix(cell.trajectories[ci].times));
    }
    save_matrix(d / "wall_seconds.splm", row_matrix(cell.wall_seconds));
  }
}

void Experiment::load_trajectories(const fs::path& dir) {
  stage("load-trajectories", [&] {
    for (auto& cell : cells_) {
      const fs::path d = dir / "traj" / cell_dir(cell.method, cell.r);
      cell.trajectories.assign(cases_.size(), Trajectory{});
      cell.failures.assign(cases_.size(), std::string());
      for (std::size_t ci = 0; ci < cases_.size(); ++ci) {
        const fs::path base = d / cases_[ci].tag;
        if (fs::exists(base.string() + ".failed")) {
          std::ifstream in(base.string() + ".failed");
          std::getline(in, cell.failures[ci]);
          continue;
        }
        cell.trajectories[ci].states = load_matrix(base.string() + ".splm");
        cell.trajectories[ci].times = row_values(load_matrix(base.string() + "_times.splm"));
        cell.trajectories[ci].steps = Index(cell.trajectories[ci].times.size()) - 1;
      }
      cell.wall_seconds = row_values(load_matrix(d / "wall_seconds.splm"));
    }
    return 0;
  });
}

// ---------------------------------------------------------------------------
// CSV output

void write_series_csv(const fs::path& path, const std::vector<double>& t, const std::vector<double>& values) {
  require(t.size() == values.size(), "write_series_csv: length mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "t,value\n";
  for (std::size_t k = 0; k < t.size(); ++k) out << fmt(t[k]) << ',' << fmt(values[k]) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void emit_metrics_csv(const std::vector<MetricReport>& reports, const fs::path& path) {
  require(!reports.empty(), "emit_metrics_csv: no reports");
  struct Row {
    const MetricReport* rep;
    std::size_t regime;
  };
  std::vector<Row> rows;
  for (const auto& r : reports) {
    for (std::size_t g = 0; g < r.regimes.size(); ++g) rows.push_back({&r, g});
  }
  auto regime_rank = [](const std::string& name) { return name == "train" ? 0 : name == "test" ? 1 : 2; };
  std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
    if (a.rep->model != b.rep->model) return a.rep->model < b.rep->model;
    if (a.rep->method != b.rep->method) return a.rep->method < b.rep->method;
    if (a.rep->r != b.rep->r) return a.rep->r < b.rep->r;
    return regime_rank(a.rep->regimes[a.regime].name) < regime_rank(b.rep->regimes[b.regime].name);
  });
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "model,method,two_r,dim_label,reduced_dim,regime,rel_error_q,rel_error_p,rel_error_phi,"
         "max_fom_energy_error,max_lifted_energy_drift,status\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : rows) {
    const auto& r = *row.rep;
    const auto& g = r.regimes[row.regime];
    out << r.model << ',' << r.method << ',' << 2 * r.r << ',' << r.dim_label << ',' << r.reduced_dim << ','
        << g.name << ',' << fmt(g.error_q) << ',' << fmt(g.error_p) << ',' << fmt(g.error_phi.value_or(nan))
        << ',' << fmt(g.max_energy_error) << ',' << fmt(g.max_lifted_energy_drift) << ','
        << (r.failed ? "failed" : "ok") << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void Experiment::write_outputs(const fs::path& dir, const std::vector<MetricReport>& reports) const {
  fs::create_directories(dir);
  emit_metrics_csv(reports, dir / "metrics.csv");

  {
    std::ofstream out(dir / "timing.csv");
    out << "model,method,two_r,dim_label,reduced_dim,online_seconds_median,repeats,train_rel_error_q,"
           "efficacy,efficacy_threshold\n";
    for (const auto& r : reports) {
      out << r.model << ',' << r.method << ',' << 2 * r.r << ',' << r.dim_label << ',' << r.reduced_dim << ','
          << fmt(r.wall_seconds) << ',' << config_.timing_repeats << ',' << fmt(r.regimes.front().error_q) << ','
          << (r.efficacy ? fmt(*r.efficacy) : std::string()) << ',' << fmt(kEfficacyThreshold) << '\n';
    }
  }
  {
    std::ofstream out(dir / "offline.csv");
    out << "stage,seconds\n";
    out << "fom_simulation," << fmt(offline_.fom_seconds) << '\n';
    out << "cotangent_lift_svd," << fmt(offline_.pod_seconds) << '\n';
    out << "lifted_snapshots_and_svd," << fmt(offline_.lifting_seconds) << '\n';
    out << "quadratic_projection," << fmt(offline_.projection_seconds) << '\n';
    out << "spdeim_jacobian_snapshots_and_svd," << fmt(offline_.spdeim_seconds) << '\n';
  }

  const Index k_train = train_columns();
  if (config_.parametric()) {
    std::ofstream out(dir / "metrics_by_parameter.csv");
    out << "model,method,two_r,case,mu,regime,rel_error_q,rel_error_p\n";
    for (const auto& cell : cells_) {
      for (std::size_t ci = 0; ci < cases_.size(); ++ci) {
        const auto& c = cases_[ci];
        double eq = std::numeric_limits<double>::quiet_NaN(), ep = eq;
        if (cell.failures[ci].empty()) {
          const Index k = std::min(k_train, c.fom.columns());
          const Matrix& states = cell.trajectories[ci].states;
          eq = relative_state_error(c.fom.get("q").leftCols(k), cell.roms[ci].reconstruct("q", states).leftCols(k));
          ep = relative_state_error(c.fom.get("p").leftCols(k), cell.roms[ci].reconstruct("p", states).leftCols(k));
        }
        out << spec_.id << ',' << cell.method.name() << ',' << 2 * cell.r << ',' << c.tag << ','
            << fmt(c.mu.value_or(1.0)) << ',' << (c.training ? "train" : "test") << ',' << fmt(eq) << ','
            << fmt(ep) << '\n';
      }
    }
  }

  if (!config_.energy_series) return;
  const fs::path series = dir / "series";
  fs::create_directories(series);
  for (const auto& cell : cells_) {
    for (std::size_t ci = 0; ci < cases_.size(); ++ci) {
      if (!cell.failures[ci].empty()) continue;
      const auto& traj = cell.trajectories[ci];
      const std::string stem = cell_dir(cell.method, cell.r) + "_" + cases_[ci].tag;
      write_series_csv(series / ("energy_fom_" + stem + ".csv"), traj.times,
                       fom_energy_series(cell.roms[ci], cases_[ci], traj));
      if (cell.roms[ci].has_lifted_energy()) {
        write_series_csv(series / ("energy_lifted_" + stem + ".csv"), traj.times,
                         lifted_energy_series(cell.roms[ci], traj));
      }
      if (is_kgz()) {
        const auto& rom = cell.roms[ci];
        const auto& fom = cases_[ci].fom;
        std::vector<double> psi, phi;
        const Matrix& fb = rom.field_basis;
        for (Index k = 0; k < fom.columns(); ++k) {
          const Vector q1 = fom.get("q1").col(k), q2 = fom.get("q2").col(k), f = fom.get("phi").col(k);
          const double e1 = (q1 - rom.phi * (rom.phi.transpose() * q1)).squaredNorm();
          const double e2 = (q2 - rom.phi * (rom.phi.transpose() * q2)).squaredNorm();
          const double den = q1.squaredNorm() + q2.squaredNorm();
          psi.push_back(den > 0.0 ? std::sqrt((e1 + e2) / den) : 0.0);
          const double fn = f.norm();
          phi.push_back(fn > 0.0 ? (f - fb * (fb.transpose() * f)).norm() / fn : 0.0);
        }
        write_series_csv(series / ("projection_psi_" + stem + ".csv"), fom.times, psi);
        write_series_csv(series / ("projection_phi_" + stem + ".csv"), fom.times, phi);
      }
    }
  }
}

std::vector<MetricReport> Experiment::run_all(const fs::path& dir) {
  simulate_fom();
  save_fom(dir);
  build_bases();
  build_roms();
  save_bases(dir);
  save_roms(dir);
  run_roms();
  save_trajectories(dir);
  const auto reports = compute_metrics();
  write_outputs(dir, reports);
  return reports;
}

}  // namespace splift
