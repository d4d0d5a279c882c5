#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "splift/basis.hpp"
#include "splift/config.hpp"
#include "splift/hyperreduction.hpp"
#include "splift/integrators.hpp"
#include "splift/lifting.hpp"
#include "splift/metrics.hpp"
#include "splift/models.hpp"
#include "splift/rom.hpp"

namespace splift {

/// Vector fields with analytic Jacobians for the full-order systems.
OdeSystem fom_system(const FomModel& model);
OdeSystem kgz_system(const SparseMatrix& laplacian);
OdeSystem lifted_system(const LiftedModel& model);

/// Integrates one model instance with implicit midpoint and returns its
/// snapshots. Wave fields: q, p. KGZ fields: q1, q2, p1, p2, varphi, phi.
/// KGZ always uses Picard iterations.
SnapshotSet simulate_fom(const ModelSpec& spec, std::optional<double> mu, double dt, double horizon,
                         Index stride, SolverKind solver, double* wall_seconds = nullptr);

/// Leading r columns of a basis computed at a larger rank.
OrthonormalBasis leading(const OrthonormalBasis& basis, Index r);

struct OfflineCosts {
  double fom_seconds = 0.0;
  double pod_seconds = 0.0;         // cotangent-lift SVD
  double lifting_seconds = 0.0;     // lifted snapshots and their SVDs
  double projection_seconds = 0.0;  // quadratic operator projection, all r
  double spdeim_seconds = 0.0;      // Jacobian snapshots and DEIM SVDs, all r
};

/// Bases at the largest requested rank; smaller ranks use leading columns.
struct BasisSet {
  OrthonormalBasis phi;
  std::vector<OrthonormalBasis> aux;           // energy-quadratization w_j
  std::vector<OrthonormalBasis> aux_standard;  // sin q, cos q
  OrthonormalBasis joint;                      // KGZ [phi, varphi, w]
  OrthonormalBasis field;                      // KGZ [varphi, phi]
  std::vector<Matrix> deim;                    // per r value (config order), empty without spDEIM
};

struct ReducedModel {
  MethodSpec method;
  Index r = 0;
  std::variant<HamiltonianRom, DeimModel, QuadraticRom, KgzGalerkinRom> rom;
  Matrix phi;          // n x r, q and p blocks
  Matrix field_basis;  // n x r, KGZ varphi and phi blocks
  Vector y0;           // reduced initial state

  Index dim() const;
  std::string dim_label() const;
  /// Full-order field reconstructed from reduced states (one column per sample).
  Matrix reconstruct(const std::string& field, const Matrix& states) const;
  bool has_lifted_energy() const { return std::holds_alternative<QuadraticRom>(rom); }
};

/// Staged experiment runner. Each stage can persist its artifacts and the
/// next stage can reload them.
class Experiment {
 public:
  struct Case {
    std::string tag;
    std::optional<double> mu;
    bool training = true;
    FomModel model;  // wave models
    SnapshotSet fom;
  };

  struct Cell {
    MethodSpec method;
    Index r = 0;
    std::vector<ReducedModel> roms;         // one per case
    std::vector<Trajectory> trajectories;   // one per case
    std::vector<double> wall_seconds;       // median online seconds per case
    std::vector<std::string> failures;      // empty when the run succeeded
  };

  explicit Experiment(ExperimentConfig config);
  // Reduced models keep pointers into cases_.
  Experiment(const Experiment&) = delete;
  Experiment& operator=(const Experiment&) = delete;

  const ExperimentConfig& config() const { return config_; }
  const ModelSpec& spec() const { return spec_; }
  bool is_kgz() const { return spec_.kind == ModelKind::KleinGordonZakharov; }
  const std::vector<Case>& cases() const { return cases_; }
  const BasisSet& bases() const { return bases_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const OfflineCosts& offline() const { return offline_; }
  const SparseMatrix& laplacian() const { return laplacian_; }
  Index train_columns() const;

  void simulate_fom();
  void build_bases();
  void build_roms();
  void run_roms();
  std::vector<MetricReport> compute_metrics() const;
  /// All stages in memory, then every artifact and CSV under dir.
  std::vector<MetricReport> run_all(const std::filesystem::path& dir);

  void save_fom(const std::filesystem::path& dir) const;
  void load_fom(const std::filesystem::path& dir);
  void save_bases(const std::filesystem::path& dir) const;
  void load_bases(const std::filesystem::path& dir);
  void save_roms(const std::filesystem::path& dir) const;
  void load_roms(const std::filesystem::path& dir);
  void save_trajectories(const std::filesystem::path& dir) const;
  void load_trajectories(const std::filesystem::path& dir);
  /// metrics.csv, metrics_by_parameter.csv, timing.csv, offline.csv and series.
  void write_outputs(const std::filesystem::path& dir, const std::vector<MetricReport>& reports) const;

  /// Lifting map used for a case under the given method.
  LiftingMap lifting_for(const MethodSpec& method, const Case& c) const;

 private:
  Matrix training_matrix(const std::string& field) const;
  ReducedModel build_rom(const MethodSpec& method, Index r, Index r_index, const Case& c) const;
  Trajectory integrate(const ReducedModel& rom, const Vector& y0, double horizon) const;
  std::vector<double> fom_energy_series(const ReducedModel& rom, const Case& c, const Trajectory& traj) const;
  std::vector<double> lifted_energy_series(const ReducedModel& rom, const Trajectory& traj) const;

  ExperimentConfig config_;
  ModelSpec spec_;
  SparseMatrix laplacian_;
  Index stride_ = 1;
  std::vector<Case> cases_;
  BasisSet bases_;
  std::vector<Cell> cells_;
  OfflineCosts offline_;
};

/// Header plus one row per (model, method, 2r, regime), sorted on that key.
void emit_metrics_csv(const std::vector<MetricReport>& reports, const std::filesystem::path& path);
/// Long-format two-column series.
void write_series_csv(const std::filesystem::path& path, const std::vector<double>& t,
                      const std::vector<double>& values);

}  // namespace splift
