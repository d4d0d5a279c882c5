#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "splift/integrators.hpp"

namespace splift {

struct MethodSpec {
  enum class Kind { Psd, Spdeim, Lifting, StandardLifting };
  Kind kind = Kind::Lifting;
  Index deim_factor = 0;    // spdeim(<k>r): m = k * r
  Index deim_absolute = 0;  // spdeim(<m>): fixed m

  /// psd | lifting | standard-lifting | spdeim(r) | spdeim(2r) | spdeim(40)
  static MethodSpec parse(const std::string& text);
  std::string name() const;
  Index deim_rank(Index r) const;
};

enum class RomIntegrator { Kahan, Midpoint };

/// Experiment description. Keys are documented in configs/README.md.
struct ExperimentConfig {
  std::string name;
  std::string model_id;
  Index nx = 0;
  Index native_nx = 0;
  double dt = 0.0;
  double train_end = 0.0;
  double test_end = 0.0;
  Index stride = 0;  // 0: every step up to 1e4 grid nodes, every 10th above
  std::vector<Index> r_values;
  std::vector<MethodSpec> methods;
  std::vector<double> mu_train;
  std::vector<double> mu_test;
  RomIntegrator lifting_integrator = RomIntegrator::Kahan;
  SolverKind fom_solver = SolverKind::Newton;
  double rom_tolerance = 1e-12;  // midpoint step residual for reduced models
  int timing_repeats = 5;
  bool energy_series = true;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  bool parametric() const { return !mu_train.empty(); }
  Index r_max() const;
  Index effective_stride(Index grid_nodes) const;
  void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);
/// Switch to the native grid size.
void apply_native_scale(ExperimentConfig& config);

}  // namespace splift
