// normsim: run norm-emergence experiments from presets or config files.
//
//   normsim list-presets
//   normsim validate <config.json>
//   normsim run <preset|config.json> [--seed N] [--replicas N] [--rounds N]
//                                    [--workers N] [--out DIR] [--full-scale]

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "normsim/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

normsim::ExperimentSpec resolve(const std::string& target) {
  const auto catalog = normsim::presets();
  if (const auto* p = normsim::find_preset(catalog, target)) return *p;
  if (std::filesystem::exists(target)) return normsim::load_experiment(target);
  std::string names;
  for (const auto& p : catalog) names += (names.empty() ? "" : ", ") + p.name;
  throw normsim::ConfigError("'" + target + "' is neither a preset nor a readable file; presets: " + names);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical norm-emergence simulator"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list-presets", "List the built-in experiment presets");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("config", validate_path, "Config file (JSON)")->required();

  std::string target;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<std::size_t> rounds;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::string out_dir = "results";
  bool full_scale = false;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a preset or config file");
  run->add_option("target", target, "Preset name or config file")->required();
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--replicas", replicas, "Replicas per sweep cell")->check(CLI::PositiveNumber);
  run->add_option("--rounds", rounds, "Rounds per replica");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--full-scale", full_scale, "1000 replicas per cell");
  run->add_flag("-q,--quiet", quiet, "No per-cell progress");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*list) {
      for (const auto& p : normsim::presets()) {
        std::cout << p.name << "\t" << p.description << "\n";
      }
      return kOk;
    }
    if (*validate) {
      const auto spec = normsim::load_experiment(validate_path);
      std::cout << "ok: " << spec.name << " (" << normsim::expand_cells(spec).size() << " cells, " << spec.replicas
                << " replicas)\n";
      return kOk;
    }

    auto spec = resolve(target);
    if (seed) spec.base.seed = *seed;
    if (full_scale) spec.replicas = 1000;
    if (replicas) spec.replicas = *replicas;
    if (rounds) spec.base.rounds = *rounds;
    spec.output_dir = out_dir;

    normsim::RunOptions options;
    options.workers = workers;
    options.keep_runs = false;
    if (!quiet) {
      options.on_cell = [](const normsim::CellResult& r) {
        const auto& a = r.aggregate;
        std::fprintf(stderr, "%-48s converged %3zu/%zu  mean round %8.1f  final payoff %8.3f\n", r.label.c_str(),
                     a.n_converged, a.n_runs, a.mean_converged_round, a.mean_final_payoff);
      };
    }
    normsim::run_experiment(spec, options);
    std::cout << (std::filesystem::path(out_dir) / spec.name).string() << "\n";
    return kOk;
  } catch (const normsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
