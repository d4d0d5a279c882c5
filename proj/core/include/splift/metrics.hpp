#pragma once

#include <optional>
#include <string>
#include <vector>

#include "splift/models.hpp"

namespace splift {

/// Accuracy threshold above which efficacy is not reported.
inline constexpr double kEfficacyThreshold = 0.1;

/// ||Q - Phi Qhat||_F^2 / ||Q||_F^2 (squared ratio, no square root).
double relative_state_error(const Matrix& reference, const Matrix& phi, const Matrix& reduced);
/// Same ratio for an already reconstructed approximation.
double relative_state_error(const Matrix& reference, const Matrix& approximation);

/// 1 / (error * seconds), absent when error exceeds the threshold.
std::optional<double> efficacy(double training_error, double wall_seconds,
                               double threshold = kEfficacyThreshold);

/// |E(Phi q(t), Phi p(t)) - E(Phi q(0), Phi p(0))| per column of reduced [q; p].
std::vector<double> fom_energy_error(const FomModel& model, const Matrix& phi,
                                     const Matrix& reduced_states);

/// |e(t) - e(0)| for any scalar series.
std::vector<double> drift_series(const std::vector<double>& values);
double max_abs(const std::vector<double>& values);

double average_relative_state_error(const std::vector<double>& errors);

/// One (method, reduced dimension) cell of an experiment.
struct MetricReport {
  std::string model;
  std::string method;
  Index reduced_dim = 0;   // 2r, 3r, 4r, 6r or 7r depending on method
  Index r = 0;
  std::string dim_label;   // "2r", "7r", ...

  struct Regime {
    std::string name;      // "train" or "test"
    double error_q = 0.0;
    double error_p = 0.0;
    std::optional<double> error_phi;  // KGZ only
    double max_energy_error = 0.0;
    double max_lifted_energy_drift = 0.0;  // NaN when not applicable
  };
  std::vector<Regime> regimes;

  double wall_seconds = 0.0;
  std::optional<double> efficacy;
  bool failed = false;
  std::string failure;
};

}  // namespace splift
