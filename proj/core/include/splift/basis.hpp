#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "splift/types.hpp"

namespace splift {

/// Labeled snapshot matrices sharing one time axis (columns ordered by time).
struct SnapshotSet {
  std::string model_id;
  std::optional<double> mu;
  std::vector<double> times;
  std::vector<std::pair<std::string, Matrix>> fields;

  void add(std::string label, Matrix data);
  const Matrix& get(std::string_view label) const;
  bool has(std::string_view label) const;
  Index columns() const { return Index(times.size()); }
  Index rows() const { return fields.empty() ? 0 : fields.front().second.rows(); }
  /// Columns [first, last) of every field.
  SnapshotSet slice(Index first, Index last) const;
};

struct OrthonormalBasis {
  Matrix vectors;          // n x r, orthonormal columns
  Vector singular_values;  // full retained spectrum, nonincreasing

  Index rows() const { return vectors.rows(); }
  Index rank() const { return vectors.cols(); }
};

struct BasisBlock {
  std::string label;
  OrthonormalBasis basis;
};

/// blkdiag(V_1, ..., V_b) in the same block order as the lifted state.
/// Blocks may share the same basis (cotangent lift reuses Phi for q and p).
struct BlockDiagonalBasis {
  std::vector<BasisBlock> blocks;

  Index block_count() const { return Index(blocks.size()); }
  Index full_dim() const;
  Index reduced_dim() const;
  Index full_offset(Index block) const;
  Index reduced_offset(Index block) const;
  const Matrix& block(Index b) const { return blocks[std::size_t(b)].basis.vectors; }

  Matrix dense() const;
  Vector expand(const Vector& reduced) const;   // V y_r
  Vector project(const Vector& full) const;     // V' y
  Matrix expand(const Matrix& reduced) const;
  Matrix project(const Matrix& full) const;

  /// A single dense block; any matrix with orthonormal columns.
  static BlockDiagonalBasis single(Matrix vectors, std::string label = "all");
};

/// Left singular vectors of the r largest singular values. Each column is
/// signed so its largest-magnitude entry is positive.
OrthonormalBasis truncated_svd(const Matrix& snapshots, Index r);

/// Smallest r whose retained energy sum_{i<=r} s_i^2 / sum s_i^2 >= 1 - eps.
Index energy_rank(const Vector& singular_values, double eps = 1e-8);
double retained_energy(const Vector& singular_values, Index r);

/// Phi from the SVD of [Q, P].
OrthonormalBasis cotangent_lift(const Matrix& q_snapshots, const Matrix& p_snapshots, Index r);

/// blkdiag(Phi, Phi, V_1, ..., V_k), V_i = truncated_svd(W_i, r).
BlockDiagonalBasis build_lifted_basis(const OrthonormalBasis& phi,
                                      const std::vector<Matrix>& aux_snapshots, Index r);

/// blkdiag(Phi x4, V_joint x3), V_joint from [phi, varphi, w] snapshots.
BlockDiagonalBasis build_kgz_basis(const OrthonormalBasis& phi, const Matrix& varphi_snapshots,
                                   const Matrix& phi_snapshots, const Matrix& w_snapshots, Index r);

/// blkdiag(Phi x4, V, V, V_1) with V from [varphi, phi] and V_1 from w
/// snapshots. Does not conserve the lifted energy; kept for comparison.
BlockDiagonalBasis build_kgz_separate_basis(const OrthonormalBasis& phi,
                                            const Matrix& varphi_snapshots,
                                            const Matrix& phi_snapshots,
                                            const Matrix& w_snapshots, Index r);

/// Per-column ||s - V V's|| / ||s||. Zero columns report 0.
std::vector<double> projection_error(const OrthonormalBasis& basis, const Matrix& snapshots);

}  // namespace splift
