#include "splift/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace splift {

namespace {

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw FormatError("cannot open '" + path.string() + "' for writing");
  }
  void magic(const char (&tag)[5]) { out_.write(tag, 4); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw FormatError("write failed for '" + path.string() + "'");
  }

 private:
  void put(std::uint64_t v, int bytes) {
    std::array<char, 8> buf{};
    for (int b = 0; b < bytes; ++b) buf[std::size_t(b)] = char((v >> (8 * b)) & 0xffu);
    out_.write(buf.data(), bytes);
  }
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw FormatError("cannot open '" + path.string() + "'");
  }
  void expect_magic(const char (&tag)[5]) {
    char buf[4];
    read(buf, 4, "magic");
    if (std::memcmp(buf, tag, 4) != 0) throw FormatError(path_.string() + ": magic mismatch");
  }
  std::uint32_t u32(const char* what) { return std::uint32_t(get(4, what)); }
  std::uint64_t u64(const char* what) { return get(8, what); }
  double f64(const char* what) { return std::bit_cast<double>(get(8, what)); }
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) throw FormatError(path_.string() + ": trailing bytes");
  }

 private:
  void read(char* buf, std::streamsize n, const char* what) {
    in_.read(buf, n);
    if (in_.gcount() != n) throw FormatError(path_.string() + ": truncated " + what);
  }
  std::uint64_t get(int bytes, const char* what) {
    std::array<unsigned char, 8> buf{};
    read(reinterpret_cast<char*>(buf.data()), bytes, what);
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= std::uint64_t(buf[std::size_t(b)]) << (8 * b);
    return v;
  }
  std::filesystem::path path_;
  std::ifstream in_;
};

std::uint32_t checked_u32(Index v, const char* what) {
  if (v < 0 || std::uint64_t(v) > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError(std::string(what) + " does not fit in u32");
  }
  return std::uint32_t(v);
}

}  // namespace

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  require(m.allFinite(), "save_matrix: non-finite entries");
  Writer w(path);
  w.magic("SPLM");
  w.u32(kMatrixVersion);
  w.u32(checked_u32(m.rows(), "rows"));
  w.u32(checked_u32(m.cols(), "cols"));
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) w.f64(m(r, c));
  }
  w.finish(path);
}

Matrix load_matrix(const std::filesystem::path& path) {
  Reader in(path);
  in.expect_magic("SPLM");
  const std::uint32_t version = in.u32("header");
  if (version != kMatrixVersion) throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
  const Index rows = in.u32("header");
  const Index cols = in.u32("header");
  const auto expected = std::uintmax_t(rows) * std::uintmax_t(cols) * 8u + 16u;
  if (std::filesystem::file_size(path) < expected) throw FormatError(path.string() + ": truncated payload");
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = in.f64("payload");
  }
  in.expect_end();
  return m;
}

void save_linear_operator(const std::filesystem::path& path, const SparseMatrix& a) {
  require(a.rows() == a.cols(), "save_linear_operator: operator must be square");
  Writer w(path);
  w.magic("SPSO");
  w.u32(kLinearOperatorVersion);
  w.u32(checked_u32(a.rows(), "nbar"));
  w.u64(std::uint64_t(a.nonZeros()));
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      w.u32(std::uint32_t(it.row()));
      w.u32(std::uint32_t(it.col()));
      w.f64(it.value());
    }
  }
  w.finish(path);
}

SparseMatrix load_linear_operator(const std::filesystem::path& path) {
  Reader in(path);
  in.expect_magic("SPSO");
  const std::uint32_t version = in.u32("header");
  if (version != kLinearOperatorVersion) {
    throw FormatError(path.string() + ": not a linear operator file (version " + std::to_string(version) + ")");
  }
  const Index nbar = in.u32("header");
  const std::uint64_t nnz = in.u64("header");
  if (std::filesystem::file_size(path) < 20u + nnz * 16u) throw FormatError(path.string() + ": truncated payload");
  std::vector<Triplet> entries;
  entries.reserve(std::size_t(nnz));
  for (std::uint64_t k = 0; k < nnz; ++k) {
    const Index row = in.u32("record"), col = in.u32("record");
    const double v = in.f64("record");
    if (row >= nbar || col >= nbar) throw FormatError(path.string() + ": index out of range");
    entries.emplace_back(row, col, v);
  }
  in.expect_end();
  SparseMatrix a(nbar, nbar);
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

void save_quadratic_operator(const std::filesystem::path& path, Index nbar,
                             const std::vector<QuadraticTerm>& b) {
  Writer w(path);
  w.magic("SPSO");
  w.u32(kQuadraticOperatorVersion);
  w.u32(checked_u32(nbar, "nbar"));
  w.u64(std::uint64_t(b.size()));
  for (const auto& t : b) {
    require(t.row >= 0 && t.row < nbar && t.i >= 0 && t.i < nbar && t.j >= 0 && t.j < nbar,
            "save_quadratic_operator: index out of range");
    w.u32(std::uint32_t(t.row));
    w.u32(std::uint32_t(t.i));
    w.u32(std::uint32_t(t.j));
    w.f64(t.value);
  }
  w.finish(path);
}

std::vector<QuadraticTerm> load_quadratic_operator(const std::filesystem::path& path, Index* nbar_out) {
  Reader in(path);
  in.expect_magic("SPSO");
  const std::uint32_t version = in.u32("header");
  if (version != kQuadraticOperatorVersion) {
    throw FormatError(path.string() + ": not a quadratic operator file (version " + std::to_string(version) + ")");
  }
  const Index nbar = in.u32("header");
  const std::uint64_t nnz = in.u64("header");
  if (std::filesystem::file_size(path) < 20u + nnz * 20u) throw FormatError(path.string() + ": truncated payload");
  std::vector<QuadraticTerm> b;
  b.reserve(std::size_t(nnz));
  for (std::uint64_t k = 0; k < nnz; ++k) {
    QuadraticTerm t;
    t.row = in.u32("record");
    t.i = in.u32("record");
    t.j = in.u32("record");
    t.value = in.f64("record");
    if (t.row >= nbar || t.i >= nbar || t.j >= nbar) throw FormatError(path.string() + ": index out of range");
    b.push_back(t);
  }
  in.expect_end();
  if (nbar_out) *nbar_out = nbar;
  return b;
}

}  // namespace splift
