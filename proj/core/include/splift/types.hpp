#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace splift {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;
using Triplet = Eigen::Triplet<double, Index>;

/// Raised when an argument violates an operation's precondition
/// (dimension mismatch, out-of-range index, malformed parameter).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by numerical routines that cannot complete (singular systems,
/// non-convergent iterations, rank deficiency).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on malformed or truncated persisted artifacts.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

inline void require_size(Index actual, Index expected, const char* what) {
  if (actual != expected) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (got " + std::to_string(actual) +
                          ", expected " + std::to_string(expected) + ")");
  }
}

}  // namespace splift
