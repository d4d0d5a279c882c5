#include "splift/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace splift {

namespace pt = boost::property_tree;

MethodSpec MethodSpec::parse(const std::string& text) {
  MethodSpec m;
  if (text == "psd") {
    m.kind = Kind::Psd;
  } else if (text == "lifting") {
    m.kind = Kind::Lifting;
  } else if (text == "standard-lifting") {
    m.kind = Kind::StandardLifting;
  } else if (text.rfind("spdeim(", 0) == 0 && text.back() == ')') {
    m.kind = Kind::Spdeim;
    std::string arg = text.substr(7, text.size() - 8);
    if (!arg.empty() && arg.back() == 'r') {
      arg.pop_back();
      m.deim_factor = arg.empty() ? 1 : std::stol(arg);
      require(m.deim_factor >= 1, "method '" + text + "': factor must be positive");
    } else {
      require(!arg.empty() && std::all_of(arg.begin(), arg.end(), ::isdigit),
              "method '" + text + "': expected spdeim(<k>r) or spdeim(<m>)");
      m.deim_absolute = std::stol(arg);
      require(m.deim_absolute >= 1, "method '" + text + "': m must be positive");
    }
  } else {
    throw InvalidArgument("unknown method '" + text + "'");
  }
  return m;
}

std::string MethodSpec::name() const {
  switch (kind) {
    case Kind::Psd: return "psd";
    case Kind::Lifting: return "lifting";
    case Kind::StandardLifting: return "standard-lifting";
    case Kind::Spdeim:
      if (deim_absolute > 0) return "spdeim(" + std::to_string(deim_absolute) + ")";
      return deim_factor == 1 ? "spdeim(r)" : "spdeim(" + std::to_string(deim_factor) + "r)";
  }
  return "unknown";
}

Index MethodSpec::deim_rank(Index r) const {
  return deim_absolute > 0 ? deim_absolute : deim_factor * r;
}

Index ExperimentConfig::r_max() const {
  return r_values.empty() ? 0 : *std::max_element(r_values.begin(), r_values.end());
}

Index ExperimentConfig::effective_stride(Index grid_nodes) const {
  if (stride > 0) return stride;
  return grid_nodes <= 10000 ? 1 : 10;
}

void ExperimentConfig::validate() const {
  require(!model_id.empty(), "config: model is required");
  require(nx >= 3, "config: nx must be at least 3");
  require(dt > 0.0, "config: dt must be positive");
  require(train_end > 0.0, "config: train_end must be positive");
  require(test_end >= train_end, "config: test_end must not precede train_end");
  for (double t : {train_end, test_end}) {
    const double steps = t / dt;
    require(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps),
            "config: horizons must be whole multiples of dt");
  }
  require(stride >= 0, "config: stride must be nonnegative");
  require(!r_values.empty(), "config: r_values must be nonempty");
  for (Index r : r_values) require(r >= 1, "config: r values must be positive");
  require(!methods.empty(), "config: methods must be nonempty");
  for (double mu : mu_train) require(mu >= 0.1 && mu <= 1.4, "config: mu values must lie in [0.1, 1.4]");
  for (double mu : mu_test) require(mu >= 0.1 && mu <= 1.4, "config: mu values must lie in [0.1, 1.4]");
  require(mu_test.empty() || !mu_train.empty(), "config: mu_test requires mu_train");
  require(timing_repeats >= 1, "config: timing_repeats must be positive");
  require(rom_tolerance > 0.0, "config: rom_tolerance must be positive");
  const bool kgz = model_id == "kgz-2d";
  for (const auto& m : methods) {
    if (m.kind == MethodSpec::Kind::StandardLifting) {
      require(model_id == "sine-gordon-1d" || model_id == "sine-gordon-2d",
              "config: standard-lifting is defined for sine-Gordon only");
    }
    if (m.kind == MethodSpec::Kind::Spdeim) {
      require(!kgz, "config: spdeim does not apply to the non-canonical KGZ system");
    }
  }
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t");
    out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

template <class T>
std::vector<T> parse_numbers(const std::string& text, const char* key) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) {
    std::istringstream in(item);
    T v{};
    in >> v;
    if (in.fail() || !in.eof()) throw InvalidArgument(std::string("config: bad number in '") + key + "'");
    out.push_back(v);
  }
  return out;
}

template <class T>
T get(const pt::ptree& tree, const char* key, T fallback) {
  try {
    return tree.get<T>(key, fallback);
  } catch (const pt::ptree_bad_data&) {
    throw InvalidArgument(std::string("config: bad value for '") + key + "'");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  c.name = get<std::string>(tree, "experiment.name", "");
  c.model_id = get<std::string>(tree, "experiment.model", "");
  c.seed = get<std::uint64_t>(tree, "experiment.seed", 0);
  c.output_dir = get<std::string>(tree, "experiment.output", "out");
  c.nx = get<Index>(tree, "grid.nx", 0);
  c.native_nx = get<Index>(tree, "grid.native_nx", c.nx);
  c.dt = get<double>(tree, "time.dt", 0.0);
  c.train_end = get<double>(tree, "time.train_end", 0.0);
  c.test_end = get<double>(tree, "time.test_end", c.train_end);
  c.stride = get<Index>(tree, "time.stride", 0);
  c.rom_tolerance = get<double>(tree, "time.rom_tolerance", 1e-12);
  const std::string solver = get<std::string>(tree, "time.fom_solver", "newton");
  if (solver == "newton") {
    c.fom_solver = SolverKind::Newton;
  } else if (solver == "picard") {
    c.fom_solver = SolverKind::Picard;
  } else {
    throw InvalidArgument("config: fom_solver must be newton or picard");
  }
  c.r_values = parse_numbers<Index>(get<std::string>(tree, "rom.r_values", ""), "rom.r_values");
  for (const auto& m : split_list(get<std::string>(tree, "rom.methods", ""))) {
    c.methods.push_back(MethodSpec::parse(m));
  }
  const std::string integrator = get<std::string>(tree, "rom.lifting_integrator", "kahan");
  if (integrator == "kahan") {
    c.lifting_integrator = RomIntegrator::Kahan;
  } else if (integrator == "midpoint") {
    c.lifting_integrator = RomIntegrator::Midpoint;
  } else {
    throw InvalidArgument("config: lifting_integrator must be kahan or midpoint");
  }
  c.timing_repeats = get<int>(tree, "rom.timing_repeats", 5);
  c.energy_series = get<bool>(tree, "output.energy_series", true);
  c.mu_train = parse_numbers<double>(get<std::string>(tree, "parameters.mu_train", ""), "parameters.mu_train");
  c.mu_test = parse_numbers<double>(get<std::string>(tree, "parameters.mu_test", ""), "parameters.mu_test");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply_native_scale(ExperimentConfig& config) {
  config.nx = config.native_nx;
  config.validate();
}

}  // namespace splift
