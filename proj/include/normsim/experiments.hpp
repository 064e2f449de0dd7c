#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "normsim/engine.hpp"
#include "normsim/metrics.hpp"

namespace normsim {

// Sweepable parameters. Values are kept as text and parsed per axis.
//   topology, game, actions, population, neighborhood, groups, cluster_size,
//   grouping, disabled_fraction, fixed_count, fixed_fraction, fixed_level,
//   placement, p_inter, variant (full | no_fmq | no_supervision), rounds,
//   alpha, epsilon0, beta, gamma, rho, C, delta, epsilon_min
struct SweepAxis {
  std::string name;
  std::vector<std::string> values;
};

const std::vector<std::string>& sweep_axis_names();

// Applies one axis value to a config; throws ConfigError on a bad value.
void apply_axis(SimConfig& config, std::string_view axis, std::string_view value);

struct ExperimentSpec {
  std::string name;
  std::string description;
  SimConfig base;
  std::vector<SweepAxis> axes;  // cartesian product; empty means one cell
  std::size_t replicas = 100;
  // Paired seeds ignore the sweep value, so every cell sees the same seed
  // list (common random numbers).
  bool paired_seeds = false;
  std::filesystem::path output_dir = "results";

  void validate() const;
};

struct Cell {
  std::string label;  // "axis=value,axis=value"; "base" without axes
  SimConfig config;
};

std::vector<Cell> expand_cells(const ExperimentSpec& spec);

std::uint64_t replica_seed(std::uint64_t base_seed, std::string_view cell_label, std::size_t replica, bool paired);

struct CellResult {
  std::string label;
  std::vector<RunSummary> runs;
  Aggregate aggregate;
};

struct RunOptions {
  std::size_t workers = 1;
  bool write_files = true;
  bool keep_runs = true;
  // Called once per finished cell, in cell order.
  std::function<void(const CellResult&)> on_cell;
};

// Runs every cell x replica; results are merged by (cell, replica) so output
// does not depend on the worker count.
std::vector<CellResult> run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

// Runs `count` replicas of one config with seeds derived from the config's
// seed, in parallel. Summaries come back in replica order.
std::vector<RunSummary> run_replicas(const SimConfig& config, std::size_t count, std::size_t workers,
                                     std::string_view label = "base", bool paired = true);

std::vector<ExperimentSpec> presets();
const ExperimentSpec* find_preset(const std::vector<ExperimentSpec>& catalog, std::string_view name);

// Config documents (JSON). A document with a "base" key is an experiment;
// anything else is a single SimConfig run as a one-cell experiment.
SimConfig parse_sim_config(std::string_view json_text);
ExperimentSpec parse_experiment(std::string_view json_text, std::string_view default_name = "config");
ExperimentSpec load_experiment(const std::filesystem::path& path);
std::string sim_config_to_json(const SimConfig& config);
std::string experiment_to_json(const ExperimentSpec& spec);

// File-system friendly cell directory name.
std::string cell_slug(std::string_view label);

}  // namespace normsim
