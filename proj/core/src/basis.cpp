#include "splift/basis.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace splift {

void SnapshotSet::add(std::string label, Matrix data) {
  if (!fields.empty()) {
    require(data.rows() == rows(), "SnapshotSet::add: row count mismatch");
  }
  require(data.cols() == columns(), "SnapshotSet::add: column count must match time stamps");
  fields.emplace_back(std::move(label), std::move(data));
}

const Matrix& SnapshotSet::get(std::string_view label) const {
  for (const auto& [name, data] : fields) {
    if (name == label) return data;
  }
  throw InvalidArgument("SnapshotSet: no field '" + std::string(label) + "'");
}

bool SnapshotSet::has(std::string_view label) const {
  for (const auto& field : fields) {
    if (field.first == label) return true;
  }
  return false;
}

SnapshotSet SnapshotSet::slice(Index first, Index last) const {
  require(first >= 0 && first <= last && last <= columns(), "SnapshotSet::slice: bad range");
  SnapshotSet out;
  out.model_id = model_id;
  out.mu = mu;
  out.times.assign(times.begin() + first, times.begin() + last);
  for (const auto& [name, data] : fields) {
    out.fields.emplace_back(name, data.middleCols(first, last - first));
  }
  return out;
}

Index BlockDiagonalBasis::full_dim() const {
  Index total = 0;
  for (const auto& b : blocks) total += b.basis.rows();
  return total;
}

Index BlockDiagonalBasis::reduced_dim() const {
  Index total = 0;
  for (const auto& b : blocks) total += b.basis.rank();
  return total;
}

Index BlockDiagonalBasis::full_offset(Index block) const {
  Index offset = 0;
  for (Index b = 0; b < block; ++b) offset += blocks[std::size_t(b)].basis.rows();
  return offset;
}

Index BlockDiagonalBasis::reduced_offset(Index block) const {
  Index offset = 0;
  for (Index b = 0; b < block; ++b) offset += blocks[std::size_t(b)].basis.rank();
  return offset;
}

Matrix BlockDiagonalBasis::dense() const {
  Matrix v = Matrix::Zero(full_dim(), reduced_dim());
  Index row = 0, col = 0;
  for (const auto& b : blocks) {
    v.block(row, col, b.basis.rows(), b.basis.rank()) = b.basis.vectors;
    row += b.basis.rows();
    col += b.basis.rank();
  }
  return v;
}

Vector BlockDiagonalBasis::expand(const Vector& reduced) const {
  require_size(reduced.size(), reduced_dim(), "BlockDiagonalBasis::expand");
  Vector out(full_dim());
  Index row = 0, col = 0;
  for (const auto& b : blocks) {
    out.segment(row, b.basis.rows()).noalias() = b.basis.vectors * reduced.segment(col, b.basis.rank());
    row += b.basis.rows();
    col += b.basis.rank();
  }
  return out;
}

Vector BlockDiagonalBasis::project(const Vector& full) const {
  require_size(full.size(), full_dim(), "BlockDiagonalBasis::project");
  Vector out(reduced_dim());
  Index row = 0, col = 0;
  for (const auto& b : blocks) {
    out.segment(col, b.basis.rank()).noalias() =
        b.basis.vectors.transpose() * full.segment(row, b.basis.rows());
    row += b.basis.rows();
    col += b.basis.rank();
  }
  return out;
}

Matrix BlockDiagonalBasis::expand(const Matrix& reduced) const {
  require_size(reduced.rows(), reduced_dim(), "BlockDiagonalBasis::expand");
  Matrix out(full_dim(), reduced.cols());
  Index row = 0, col = 0;
  for (const auto& b : blocks) {
    out.middleRows(row, b.basis.rows()).noalias() =
        b.basis.vectors * reduced.middleRows(col, b.basis.rank());
    row += b.basis.rows();
    col += b.basis.rank();
  }
  return out;
}

Matrix BlockDiagonalBasis::project(const Matrix& full) const {
  require_size(full.rows(), full_dim(), "BlockDiagonalBasis::project");
  Matrix out(reduced_dim(), full.cols());
  Index row = 0, col = 0;
  for (const auto& b : blocks) {
    out.middleRows(col, b.basis.rank()).noalias() =
        b.basis.vectors.transpose() * full.middleRows(row, b.basis.rows());
    row += b.basis.rows();
    col += b.basis.rank();
  }
  return out;
}

BlockDiagonalBasis BlockDiagonalBasis::single(Matrix vectors, std::string label) {
  BlockDiagonalBasis basis;
  basis.blocks.push_back({std::move(label), OrthonormalBasis{std::move(vectors), Vector()}});
  return basis;
}

OrthonormalBasis truncated_svd(const Matrix& snapshots, Index r) {
  require(r >= 1, "truncated_svd: rank must be positive");
  require(r <= std::min(snapshots.rows(), snapshots.cols()),
          "truncated_svd: rank exceeds min(rows, cols)");
  require(snapshots.allFinite(), "truncated_svd: non-finite snapshot entries");

  Eigen::BDCSVD<Matrix> svd(snapshots, Eigen::ComputeThinU);
  OrthonormalBasis basis;
  basis.vectors = svd.matrixU().leftCols(r);
  basis.singular_values = svd.singularValues();
  for (Index c = 0; c < r; ++c) {
    Index pivot = 0;
    basis.vectors.col(c).cwiseAbs().maxCoeff(&pivot);
    if (basis.vectors(pivot, c) < 0.0) basis.vectors.col(c) *= -1.0;
  }
  return basis;
}

double retained_energy(const Vector& singular_values, Index r) {
  const double total = singular_values.squaredNorm();
  if (total == 0.0) return 1.0;
  return singular_values.head(std::min(r, singular_values.size())).squaredNorm() / total;
}

Index energy_rank(const Vector& singular_values, double eps) {
  require(eps >= 0.0 && eps < 1.0, "energy_rank: eps must lie in [0, 1)");
  const double total = singular_values.squaredNorm();
  if (total == 0.0) return 0;
  double kept = 0.0;
  for (Index i = 0; i < singular_values.size(); ++i) {
    kept += singular_values[i] * singular_values[i];
    if (kept / total >= 1.0 - eps) return i + 1;
  }
  return singular_values.size();
}

OrthonormalBasis cotangent_lift(const Matrix& q, const Matrix& p, Index r) {
  require(q.rows() == p.rows(), "cotangent_lift: Q and P row mismatch");
  Matrix extended(q.rows(), q.cols() + p.cols());
  extended << q, p;
  return truncated_svd(extended, r);
}

BlockDiagonalBasis build_lifted_basis(const OrthonormalBasis& phi,
                                      const std::vector<Matrix>& aux, Index r) {
  BlockDiagonalBasis basis;
  basis.blocks.push_back({"q", phi});
  basis.blocks.push_back({"p", phi});
  for (std::size_t i = 0; i < aux.size(); ++i) {
    require(aux[i].rows() == phi.rows(), "build_lifted_basis: auxiliary snapshot row mismatch");
    basis.blocks.push_back({"w" + std::to_string(i + 1), truncated_svd(aux[i], r)});
  }
  return basis;
}

namespace {

Matrix hcat(std::initializer_list<const Matrix*> parts) {
  Index rows = (*parts.begin())->rows(), cols = 0;
  for (const Matrix* m : parts) {
    require(m->rows() == rows, "snapshot concatenation: row mismatch");
    cols += m->cols();
  }
  Matrix out(rows, cols);
  Index c = 0;
  for (const Matrix* m : parts) {
    out.middleCols(c, m->cols()) = *m;
    c += m->cols();
  }
  return out;
}

}  // namespace

BlockDiagonalBasis build_kgz_basis(const OrthonormalBasis& phi, const Matrix& varphi,
                                   const Matrix& phi_snap, const Matrix& w, Index r) {
  require(varphi.rows() == phi.rows(), "build_kgz_basis: row mismatch");
  const OrthonormalBasis joint = truncated_svd(hcat({&phi_snap, &varphi, &w}), r);
  BlockDiagonalBasis basis;
  for (const char* label : {"q1", "q2", "p1", "p2"}) basis.blocks.push_back({label, phi});
  for (const char* label : {"varphi", "phi", "w"}) basis.blocks.push_back({label, joint});
  return basis;
}

BlockDiagonalBasis build_kgz_separate_basis(const OrthonormalBasis& phi, const Matrix& varphi,
                                            const Matrix& phi_snap, const Matrix& w, Index r) {
  require(varphi.rows() == phi.rows(), "build_kgz_separate_basis: row mismatch");
  const OrthonormalBasis field = truncated_svd(hcat({&varphi, &phi_snap}), r);
  BlockDiagonalBasis basis;
  for (const char* label : {"q1", "q2", "p1", "p2"}) basis.blocks.push_back({label, phi});
  basis.blocks.push_back({"varphi", field});
  basis.blocks.push_back({"phi", field});
  basis.blocks.push_back({"w", truncated_svd(w, r)});
  return basis;
}

std::vector<double> projection_error(const OrthonormalBasis& basis, const Matrix& snapshots) {
  require(snapshots.rows() == basis.rows(), "projection_error: row mismatch");
  std::vector<double> errors(std::size_t(snapshots.cols()));
  for (Index c = 0; c < snapshots.cols(); ++c) {
    const double norm = snapshots.col(c).norm();
    if (norm == 0.0) {
      errors[std::size_t(c)] = 0.0;
      continue;
    }
    const Vector coeffs = basis.vectors.transpose() * snapshots.col(c);
    errors[std::size_t(c)] = (snapshots.col(c) - basis.vectors * coeffs).norm() / norm;
  }
  return errors;
}

}  // namespace splift
