#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "splift/lifting.hpp"

namespace splift {

/// Dense matrix file: "SPLM", u32 version, u32 rows, u32 cols, then
/// rows * cols little-endian f64 in column-major order.
void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

/// Sparse operator file: "SPSO", u32 version, u32 nbar, u64 nnz, then records.
/// Version 1 holds linear (row, col, value) records, version 2 quadratic
/// (row, i, j, value) records.
void save_linear_operator(const std::filesystem::path& path, const SparseMatrix& a);
SparseMatrix load_linear_operator(const std::filesystem::path& path);
void save_quadratic_operator(const std::filesystem::path& path, Index nbar,
                             const std::vector<QuadraticTerm>& b);
std::vector<QuadraticTerm> load_quadratic_operator(const std::filesystem::path& path, Index* nbar = nullptr);

inline constexpr std::uint32_t kMatrixVersion = 1;
inline constexpr std::uint32_t kLinearOperatorVersion = 1;
inline constexpr std::uint32_t kQuadraticOperatorVersion = 2;

}  // namespace splift
