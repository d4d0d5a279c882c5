#include "splift/metrics.hpp"

#include <cmath>
#include <numeric>

namespace splift {

double relative_state_error(const Matrix& reference, const Matrix& approximation) {
  require(reference.rows() == approximation.rows() && reference.cols() == approximation.cols(),
          "relative_state_error: shape mismatch");
  const double denom = reference.squaredNorm();
  require(denom > 0.0, "relative_state_error: zero-norm reference");
  return (reference - approximation).squaredNorm() / denom;
}

double relative_state_error(const Matrix& reference, const Matrix& phi, const Matrix& reduced) {
  require(phi.rows() == reference.rows() && phi.cols() == reduced.rows(),
          "relative_state_error: basis shape mismatch");
  return relative_state_error(reference, phi * reduced);
}

std::optional<double> efficacy(double training_error, double wall_seconds, double threshold) {
  require(training_error >= 0.0 && wall_seconds > 0.0, "efficacy: inputs must be positive");
  if (!(training_error <= threshold) || training_error == 0.0) return std::nullopt;
  return 1.0 / (training_error * wall_seconds);
}

std::vector<double> fom_energy_error(const FomModel& model, const Matrix& phi,
                                     const Matrix& reduced_states) {
  const Index r = phi.cols();
  require(phi.rows() == model.size(), "fom_energy_error: basis row mismatch");
  require(reduced_states.rows() == 2 * r, "fom_energy_error: reduced state size mismatch");
  std::vector<double> energy(std::size_t(reduced_states.cols()));
  for (Index c = 0; c < reduced_states.cols(); ++c) {
    FomState s{phi * reduced_states.col(c).head(r), phi * reduced_states.col(c).tail(r), 0.0};
    energy[std::size_t(c)] = fom_energy(model, s);
  }
  return drift_series(energy);
}

std::vector<double> drift_series(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = std::abs(values[k] - values.front());
  return out;
}

double max_abs(const std::vector<double>& values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double average_relative_state_error(const std::vector<double>& errors) {
  require(!errors.empty(), "average_relative_state_error: empty list");
  return std::accumulate(errors.begin(), errors.end(), 0.0) / double(errors.size());
}

}  // namespace splift
