#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "splift/config.hpp"
#include "splift/harness.hpp"
#include "splift/io.hpp"
#include "support.hpp"

using namespace splift;
using namespace testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("splift_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

std::size_t count_lines(const std::string& text) { return std::size_t(std::count(text.begin(), text.end(), '\n')); }

const char* kExpWave = R"(
[experiment]
name = tiny-exp
model = exp-wave
seed = 7

[grid]
nx = 40

[time]
dt = 0.01
train_end = 1
test_end = 2

[rom]
r_values = 2, 3
methods = psd, spdeim(2r), lifting
timing_repeats = 1
)";

}  // namespace

TEST_CASE("matrix files round-trip bit-exactly") {
  const fs::path dir = scratch_dir("io");
  const Matrix m = random_matrix(7, 3);
  save_matrix(dir / "m.splm", m);
  const Matrix back = load_matrix(dir / "m.splm");
  REQUIRE(back.rows() == 7);
  REQUIRE(back.cols() == 3);
  CHECK(std::memcmp(back.data(), m.data(), sizeof(double) * 21) == 0);

  save_matrix(dir / "small.splm", Matrix::Identity(2, 2));
  const std::string bytes = read_file(dir / "small.splm");
  CHECK(bytes.size() == 16 + 4 * 8);
  CHECK(bytes.substr(0, 4) == "SPLM");
  // little-endian u32 fields after the magic
  CHECK(std::uint8_t(bytes[4]) == 1);
  CHECK(std::uint8_t(bytes[8]) == 2);
  CHECK(std::uint8_t(bytes[12]) == 2);
  CHECK(std::uint8_t(bytes[9]) == 0);
  // 1.0 little-endian: 00 .. 00 f0 3f
  CHECK(std::uint8_t(bytes[16 + 6]) == 0xf0);
  CHECK(std::uint8_t(bytes[16 + 7]) == 0x3f);
}

TEST_CASE("malformed matrix files are rejected") {
  const fs::path dir = scratch_dir("io_bad");
  save_matrix(dir / "ok.splm", random_matrix(3, 3));
  const std::string bytes = read_file(dir / "ok.splm");

  write_file(dir / "truncated.splm", bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(load_matrix(dir / "truncated.splm"), FormatError);

  write_file(dir / "short_header.splm", bytes.substr(0, 10));
  CHECK_THROWS_AS(load_matrix(dir / "short_header.splm"), FormatError);

  std::string magic = bytes;
  magic[0] = 'X';
  write_file(dir / "magic.splm", magic);
  CHECK_THROWS_AS(load_matrix(dir / "magic.splm"), FormatError);

  std::string version = bytes;
  version[4] = 9;
  write_file(dir / "version.splm", version);
  CHECK_THROWS_AS(load_matrix(dir / "version.splm"), FormatError);

  CHECK_THROWS(load_matrix(dir / "missing.splm"));
  Matrix bad = Matrix::Ones(2, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(save_matrix(dir / "bad.splm", bad), InvalidArgument);
}

TEST_CASE("sparse operator files round-trip") {
  const fs::path dir = scratch_dir("io_ops");
  const auto grid = SpatialGrid::line(6, 0.0, 3.0, Boundary::Periodic);
  const auto lifted = build_lifted_operators(default_lifting(ModelKind::SineGordon), build_laplacian(grid));

  save_linear_operator(dir / "a.spso", lifted.linear);
  const SparseMatrix a = load_linear_operator(dir / "a.spso");
  CHECK(Matrix(a - lifted.linear).cwiseAbs().maxCoeff() == 0.0);

  save_quadratic_operator(dir / "b.spso", lifted.nbar, lifted.quadratic);
  Index nbar = 0;
  const auto b = load_quadratic_operator(dir / "b.spso", &nbar);
  CHECK(nbar == lifted.nbar);
  REQUIRE(b.size() == lifted.quadratic.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    CHECK(b[k].row == lifted.quadratic[k].row);
    CHECK(b[k].i == lifted.quadratic[k].i);
    CHECK(b[k].j == lifted.quadratic[k].j);
    CHECK(b[k].value == lifted.quadratic[k].value);
  }
  const std::string bytes = read_file(dir / "b.spso");
  CHECK(bytes.substr(0, 4) == "SPSO");
  CHECK(bytes.size() == 4 + 4 + 4 + 8 + b.size() * (12 + 8));

  CHECK_THROWS_AS(load_linear_operator(dir / "b.spso"), FormatError);
  CHECK_THROWS_AS(load_quadratic_operator(dir / "a.spso"), FormatError);
  write_file(dir / "cut.spso", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_quadratic_operator(dir / "cut.spso"), FormatError);
}

TEST_CASE("config parsing") {
  const auto c = parse_config(kExpWave);
  CHECK(c.name == "tiny-exp");
  CHECK(c.model_id == "exp-wave");
  CHECK(c.nx == 40);
  CHECK(c.native_nx == 40);
  CHECK(c.dt == 0.01);
  CHECK(c.test_end == 2.0);
  CHECK(c.seed == 7);
  CHECK(c.r_values == std::vector<Index>{2, 3});
  REQUIRE(c.methods.size() == 3);
  CHECK(c.methods[1].name() == "spdeim(2r)");
  CHECK(c.methods[1].deim_rank(3) == 6);
  CHECK(c.lifting_integrator == RomIntegrator::Kahan);
  CHECK(c.fom_solver == SolverKind::Newton);
  CHECK(c.effective_stride(200) == 1);
  CHECK(c.effective_stride(20000) == 10);

  CHECK(MethodSpec::parse("spdeim(r)").deim_rank(4) == 4);
  CHECK(MethodSpec::parse("spdeim(40)").deim_rank(4) == 40);
  CHECK_THROWS_AS(MethodSpec::parse("deim"), InvalidArgument);
  CHECK_THROWS_AS(MethodSpec::parse("spdeim(x)"), InvalidArgument);

  const std::string base = kExpWave;
  CHECK_THROWS_AS(parse_config(base + "\n[parameters]\nmu_train = 0.05\n"), InvalidArgument);
  std::string bad_methods = base;
  bad_methods.replace(bad_methods.find("psd, spdeim(2r), lifting"), 24, "standard-lifting");
  CHECK_THROWS_AS(parse_config(bad_methods), InvalidArgument);
  std::string bad_dt = base;
  bad_dt.replace(bad_dt.find("dt = 0.01"), 9, "dt = 0.03");
  CHECK_THROWS_AS(parse_config(bad_dt), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[grid]\nnx = 10\n"), InvalidArgument);

  for (const auto& entry : fs::directory_iterator(SPLIFT_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    CAPTURE(entry.path().string());
    auto cfg = load_config(entry.path());
    CHECK_NOTHROW(apply_native_scale(cfg));
  }
}

TEST_CASE("metrics CSV row count and determinism") {
  const fs::path dir = scratch_dir("csv");
  MetricReport rep;
  rep.model = "exp-wave";
  rep.method = "lifting";
  rep.r = 2;
  rep.reduced_dim = 6;
  rep.dim_label = "3r";
  rep.regimes = {{"test", 0.2, 0.3, std::nullopt, 1.0, 1e-12}, {"train", 0.1, 0.2, std::nullopt, 0.5, 1e-13}};
  emit_metrics_csv({rep}, dir / "a.csv");
  const std::string a = read_file(dir / "a.csv");
  CHECK(count_lines(a) == 3);
  CHECK(a.find("train") < a.find("test"));
  emit_metrics_csv({rep}, dir / "b.csv");
  CHECK(read_file(dir / "b.csv") == a);
  CHECK_THROWS_AS(emit_metrics_csv({}, dir / "c.csv"), InvalidArgument);

  write_series_csv(dir / "s.csv", {0.0, 0.5}, {1.0, 2.0});
  const std::string s = read_file(dir / "s.csv");
  CHECK(s.rfind("t,value\n", 0) == 0);
  CHECK(count_lines(s) == 3);
}

TEST_CASE("end-to-end run is deterministic and stages reload") {
  const auto config = parse_config(kExpWave);
  const fs::path a = scratch_dir("e2e_a"), b = scratch_dir("e2e_b");

  Experiment first(config);
  const auto reports = first.run_all(a);
  REQUIRE(reports.size() == 6);
  for (const auto& r : reports) {
    CHECK_FALSE(r.failed);
    REQUIRE(r.regimes.size() == 2);
    CHECK(r.regimes[0].name == "train");
    CHECK(r.regimes[0].error_q < 1.0);
    if (r.method == "lifting") {
      CHECK(r.dim_label == "3r");
      CHECK(r.reduced_dim == 3 * r.r);
    }
  }
  const std::string metrics = read_file(a / "metrics.csv");
  CHECK(count_lines(metrics) == 1 + 6 * 2);
  for (const char* f : {"timing.csv", "offline.csv"}) CHECK(fs::exists(a / f));
  CHECK(fs::exists(a / "series"));

  Experiment second(config);
  second.run_all(b);
  CHECK(read_file(b / "metrics.csv") == metrics);

  Experiment staged(config);
  staged.load_fom(a);
  staged.load_bases(a);
  staged.load_roms(a);
  staged.load_trajectories(a);
  const fs::path c = scratch_dir("e2e_c");
  staged.write_outputs(c, staged.compute_metrics());
  CHECK(read_file(c / "metrics.csv") == metrics);

  Experiment rebuilt(config);
  rebuilt.load_fom(a);
  rebuilt.build_bases();
  rebuilt.build_roms();
  rebuilt.run_roms();
  const fs::path d = scratch_dir("e2e_d");
  rebuilt.write_outputs(d, rebuilt.compute_metrics());
  CHECK(read_file(d / "metrics.csv") == metrics);

  Experiment empty(config);
  CHECK_THROWS(empty.load_fom(scratch_dir("e2e_empty")));
}

TEST_CASE("parametric and KGZ runs") {
  SUBCASE("Klein-Gordon parameter sweep") {
    const auto config = parse_config(R"(
[experiment]
name = tiny-kg
model = klein-gordon-2d
[grid]
nx = 12
[time]
dt = 0.1
train_end = 1
[rom]
r_values = 4
methods = psd, lifting
timing_repeats = 1
[parameters]
mu_train = 0.5, 1.0
mu_test = 1.2
)");
    Experiment e(config);
    const fs::path dir = scratch_dir("kg");
    const auto reports = e.run_all(dir);
    CHECK(e.cases().size() == 3);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].regimes.size() == 2);
    const std::string by_param = read_file(dir / "metrics_by_parameter.csv");
    CHECK(count_lines(by_param) == 1 + 2 * 3);
  }
  SUBCASE("KGZ") {
    const auto config = parse_config(R"(
[experiment]
name = tiny-kgz
model = kgz-2d
[grid]
nx = 10
[time]
dt = 0.01
train_end = 0.2
test_end = 0.3
fom_solver = picard
[rom]
r_values = 2
methods = psd, lifting
timing_repeats = 1
)");
    Experiment e(config);
    const auto reports = e.run_all(scratch_dir("kgz"));
    REQUIRE(reports.size() == 2);
    for (const auto& r : reports) {
      CHECK_FALSE(r.failed);
      REQUIRE(r.regimes.front().error_phi.has_value());
    }
    const auto& lifting = reports[0].method == "lifting" ? reports[0] : reports[1];
    CHECK(lifting.dim_label == "7r");
  }
}
