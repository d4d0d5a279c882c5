#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>

#include "splift/harness.hpp"

namespace {

struct Options {
  std::string config;
  bool native_scale = false;
  std::optional<std::uint64_t> seed;
  std::string out;
};

splift::ExperimentConfig resolve(const Options& opt) {
  splift::ExperimentConfig cfg = splift::load_config(opt.config);
  if (opt.native_scale) splift::apply_native_scale(cfg);
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  cfg.validate();
  return cfg;
}

void print_summary(const std::vector<splift::MetricReport>& reports) {
  for (const auto& r : reports) {
    for (const auto& g : r.regimes) {
      std::printf("%-18s 2r=%-4lld %-5s err_q=%.3e err_p=%.3e%s\n", r.method.c_str(),
                  static_cast<long long>(2 * r.r), g.name.c_str(), g.error_q, g.error_p,
                  r.failed ? "  [failed]" : "");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving lifting model reduction"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Experiment INI file")->required()->check(CLI::ExistingFile);
    sub->add_flag("--native-scale", opt.native_scale, "Use the native grid size from the config");
    sub->add_option("--seed", opt.seed, "Seed recorded with the run");
    sub->add_option("--out", opt.out, "Output directory (overrides the config)");
  };

  auto* simulate = app.add_subcommand("simulate-fom", "Integrate the full-order model and store snapshots");
  auto* basis = app.add_subcommand("build-basis", "Compute reduced bases from stored snapshots");
  auto* rom = app.add_subcommand("build-rom", "Project reduced operators from stored bases");
  auto* run = app.add_subcommand("run-rom", "Integrate stored reduced models");
  auto* experiment = app.add_subcommand("experiment", "Run every stage and write all outputs");
  auto* metrics = app.add_subcommand("metrics", "Recompute metrics from stored artifacts");
  for (auto* sub : {simulate, basis, rom, run, experiment, metrics}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    splift::Experiment exp(resolve(opt));
    const auto dir = exp.config().output_dir;
    if (*simulate) {
      exp.simulate_fom();
      exp.save_fom(dir);
    } else if (*basis) {
      exp.load_fom(dir);
      exp.build_bases();
      exp.save_bases(dir);
    } else if (*rom) {
      exp.load_bases(dir);
      exp.build_roms();
      exp.save_roms(dir);
      exp.save_bases(dir);
    } else if (*run) {
      exp.load_bases(dir);
      exp.load_roms(dir);
      exp.run_roms();
      exp.save_trajectories(dir);
    } else if (*experiment) {
      print_summary(exp.run_all(dir));
    } else if (*metrics) {
      exp.load_fom(dir);
      exp.load_bases(dir);
      exp.load_roms(dir);
      exp.load_trajectories(dir);
      const auto reports = exp.compute_metrics();
      exp.write_outputs(dir, reports);
      print_summary(reports);
    }
  } catch (const std::exception& e) {
    std::cerr << "splift: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
