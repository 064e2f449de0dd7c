#include "normsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace normsim {

namespace {

using json = nlohmann::ordered_json;

double parse_double(std::string_view axis, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(std::string(axis) + ": '" + std::string(text) + "' is not a number");
  }
  return v;
}

std::size_t parse_count(std::string_view axis, std::string_view text) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(std::string(axis) + ": '" + std::string(text) + "' is not a non-negative integer");
  }
  return v;
}

template <typename F>
auto rethrow_as_config(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Action parse_action(std::string_view text) {
  if (text.size() == 1 && text[0] >= 'a' && text[0] <= 'z') return static_cast<Action>(text[0] - 'a');
  return parse_count("action", text);
}

}  // namespace

const std::vector<std::string>& sweep_axis_names() {
  static const std::vector<std::string> names = {
      "topology",    "game",           "actions",     "population", "neighborhood", "groups",
      "cluster_size", "grouping",      "disabled_fraction", "fixed_count", "fixed_fraction", "fixed_level",
      "placement",   "p_inter",        "variant",     "rounds",     "alpha",        "epsilon0",
      "beta",        "gamma",          "rho",         "C",          "delta",        "epsilon_min"};
  return names;
}

void apply_axis(SimConfig& c, std::string_view axis, std::string_view value) {
  rethrow_as_config([&] {
    if (axis == "topology") {
      c.topology.kind = parse_topology_kind(value);
      c.topology.edge_list.reset();
    } else if (axis == "game") {
      c.game.kind = parse_game_kind(value);
      c.game.file.reset();
      if (c.game.kind == GameKind::CGHP3) c.game.n_actions = 3;
    } else if (axis == "actions") {
      c.game.n_actions = parse_count(axis, value);
    } else if (axis == "population") {
      c.topology.n = parse_count(axis, value);
    } else if (axis == "neighborhood") {
      c.topology.params.mean_degree = parse_double(axis, value);
    } else if (axis == "groups") {
      c.grouping.groups = parse_count(axis, value);
      c.grouping.cluster_size.reset();
    } else if (axis == "cluster_size") {
      c.grouping.cluster_size = parse_count(axis, value);
      c.grouping.groups.reset();
    } else if (axis == "grouping") {
      c.grouping.kind = parse_grouping_kind(value);
    } else if (axis == "disabled_fraction") {
      c.disabled_supervisor_fraction = parse_double(axis, value);
    } else if (axis == "fixed_count") {
      c.fixed.count = parse_count(axis, value);
    } else if (axis == "fixed_fraction") {
      const double f = parse_double(axis, value);
      if (f < 0.0 || f > 1.0) throw ConfigError("fixed_fraction must be in [0, 1]");
      c.fixed.count = static_cast<std::size_t>(std::llround(f * static_cast<double>(c.topology.n)));
    } else if (axis == "fixed_level") {
      c.fixed.level = parse_agent_level(value);
    } else if (axis == "placement") {
      c.fixed.placement = parse_placement_metric(value);
    } else if (axis == "p_inter") {
      c.isolation.enabled = true;
      c.isolation.p_inter = parse_double(axis, value);
    } else if (axis == "variant") {
      if (value == "full") {
      } else if (value == "no_fmq") {
        c.learner.fmq_weight = 0.0;
      } else if (value == "no_supervision") {
        c.disabled_supervisor_fraction = 1.0;
      } else {
        throw ConfigError("variant: unknown value '" + std::string(value) + "' (expected full, no_fmq, no_supervision)");
      }
    } else if (axis == "rounds") {
      c.rounds = parse_count(axis, value);
    } else if (axis == "alpha") {
      c.learner.learning_rate = parse_double(axis, value);
    } else if (axis == "epsilon0") {
      c.learner.initial_exploration = parse_double(axis, value);
    } else if (axis == "beta") {
      c.learner.imitation_sharpness = parse_double(axis, value);
    } else if (axis == "gamma") {
      c.learner.exploration_weight = parse_double(axis, value);
    } else if (axis == "rho") {
      c.learner.suggestion_weight = parse_double(axis, value);
    } else if (axis == "C") {
      c.learner.fmq_weight = parse_double(axis, value);
    } else if (axis == "delta") {
      c.learner.rule_threshold = parse_double(axis, value);
    } else if (axis == "epsilon_min") {
      c.learner.min_exploration = parse_double(axis, value);
    } else {
      throw ConfigError("unknown sweep axis '" + std::string(axis) + "'");
    }
    return 0;
  });
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw ConfigError("experiment needs a name");
  if (replicas < 1) throw ConfigError("replicas must be at least 1");
  std::set<std::string> seen;
  for (const auto& axis : axes) {
    if (!seen.insert(axis.name).second) throw ConfigError("axis '" + axis.name + "' appears twice");
    if (axis.values.empty()) throw ConfigError("axis '" + axis.name + "' has no values");
  }
  for (const auto& cell : expand_cells(*this)) {
    try {
      cell.config.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("cell " + cell.label + ": " + e.what());
    }
  }
}

std::vector<Cell> expand_cells(const ExperimentSpec& spec) {
  std::vector<Cell> cells{{"", spec.base}};
  for (const auto& axis : spec.axes) {
    std::vector<Cell> next;
    for (const auto& cell : cells) {
      for (const auto& value : axis.values) {
        Cell c = cell;
        apply_axis(c.config, axis.name, value);
        c.label += (c.label.empty() ? "" : ",") + axis.name + "=" + value;
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  if (spec.axes.empty()) cells.front().label = "base";
  return cells;
}

std::uint64_t replica_seed(std::uint64_t base_seed, std::string_view cell_label, std::size_t replica, bool paired) {
  const std::uint64_t cell_seed = paired ? base_seed : derive_seed(base_seed, cell_label);
  return derive_seed(cell_seed, static_cast<std::uint64_t>(replica));
}

namespace {

// Runs job(i) for i in [0, count) on up to `workers` threads. The first
// exception is rethrown after all threads stop.
template <typename Job>
void parallel_for(std::size_t count, std::size_t workers, Job&& job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::vector<RunSummary> run_replicas(const SimConfig& config, std::size_t count, std::size_t workers,
                                     std::string_view label, bool paired) {
  config.validate();
  const Game game = build_game(config.game);
  std::vector<RunSummary> runs(count);
  parallel_for(count, workers, [&](std::size_t i) {
    SimConfig c = config;
    c.seed = replica_seed(config.seed, label, i, paired);
    c.keep_trace = false;
    runs[i] = run_simulation(c, game).summary;
  });
  return runs;
}

std::string cell_slug(std::string_view label) {
  std::string out;
  for (char ch : label) {
    const bool keep = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '.' ||
                      ch == '-' || ch == '_';
    if (keep) {
      out += ch;
    } else if (ch == '=') {
      out += '-';
    } else {
      out += '_';
    }
  }
  return out.empty() ? "cell" : out;
}

std::vector<CellResult> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  const auto cells = expand_cells(spec);
  const auto root = spec.output_dir / spec.name;
  if (options.write_files) {
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) throw std::runtime_error("cannot create " + root.string() + ": " + ec.message());
    write_file(root / "experiment.json", experiment_to_json(spec) + "\n");
  }

  std::vector<CellResult> results;
  std::vector<std::pair<std::string, Aggregate>> named;
  for (const auto& cell : cells) {
    CellResult r;
    r.label = cell.label;
    r.runs = run_replicas(cell.config, spec.replicas, options.workers, cell.label, spec.paired_seeds);
    r.aggregate = aggregate(r.runs);
    if (options.write_files) {
      const auto dir = root / cell_slug(cell.label);
      std::filesystem::create_directories(dir);
      std::ostringstream rounds;
      write_rounds_csv(r.aggregate, rounds);
      write_file(dir / "rounds.csv", rounds.str());
      std::ostringstream runs;
      write_runs_csv(r.runs, runs);
      write_file(dir / "runs.csv", runs.str());
      write_file(dir / "summary.json", aggregate_to_json(r.aggregate) + "\n");
    }
    if (options.on_cell) options.on_cell(r);
    named.emplace_back(r.label, r.aggregate);
    if (!options.keep_runs) r.runs.clear();
    results.push_back(std::move(r));
  }
  if (options.write_files) {
    std::ostringstream cmp;
    write_comparison_csv(compare(named), cmp);
    write_file(root / "comparison.csv", cmp.str());
  }
  return results;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

SimConfig base_config(GameKind kind, std::size_t n_actions) {
  SimConfig c;
  c.game.kind = kind;
  c.game.n_actions = n_actions;
  c.topology.kind = TopologyKind::SmallWorld;
  c.topology.n = 100;
  c.topology.params.mean_degree = 6;
  return c;
}

ExperimentSpec make_spec(std::string name, std::string description, SimConfig base, std::vector<SweepAxis> axes) {
  ExperimentSpec s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.base = std::move(base);
  s.axes = std::move(axes);
  return s;
}

const SweepAxis kVariants{"variant", {"full", "no_fmq", "no_supervision"}};

}  // namespace

std::vector<ExperimentSpec> presets() {
  std::vector<ExperimentSpec> out;
  out.push_back(make_spec("fig2", "CG(6) payoff dynamics: full hierarchy against its two ablations",
                          base_config(GameKind::CG, 6), {kVariants}));
  out.push_back(make_spec("fig3", "ACG(6) payoff dynamics: full hierarchy against its two ablations",
                          base_config(GameKind::ACG, 6), {kVariants}));
  out.push_back(make_spec("fig4", "CGHP(6) payoff dynamics: full hierarchy against its two ablations",
                          base_config(GameKind::CGHP, 6), {kVariants}));
  out.push_back(make_spec("fig5", "FSCGHP(6) payoff dynamics: full hierarchy against its two ablations",
                          base_config(GameKind::FSCGHP, 6), {kVariants}));
  {
    auto c = base_config(GameKind::CGHP, 6);
    c.grouping.kind = GroupingKind::Random;
    c.grouping.cluster_size = 25;
    out.push_back(make_spec("fig6", "CGHP(6) population-size sweep at a constant cluster size of 25 (random grouping)",
                            c, {{"population", {"50", "100", "200", "500", "1000"}}}));
  }
  out.push_back(make_spec("fig7", "CGHP action-size sweep", base_config(GameKind::CGHP, 6),
                          {{"actions", {"4", "6", "8", "10", "12"}}}));
  {
    auto c = base_config(GameKind::CGHP, 6);
    c.grouping.kind = GroupingKind::Random;
    out.push_back(make_spec("fig9", "CGHP(6) payoff dynamics for a few cluster sizes (random grouping)", c,
                            {{"cluster_size", {"1", "5", "15", "50", "100"}}}));
    out.push_back(make_spec("fig10", "CGHP(6) convergence round across cluster sizes (random grouping)", c,
                            {{"cluster_size", {"1", "2", "5", "10", "15", "20", "25", "50", "100"}}}));
  }
  {
    auto s = make_spec("fig11", "CGHP(6) with a growing fraction of disabled supervisors",
                       base_config(GameKind::CGHP, 6), {{"disabled_fraction", {"0", "0.25", "0.5", "0.75", "1"}}});
    s.paired_seeds = true;
    out.push_back(std::move(s));
  }
  out.push_back(make_spec("fig12", "CG(2) norm frequencies without fixed agents", base_config(GameKind::CG, 2), {}));
  {
    auto c = base_config(GameKind::CG, 2);
    c.fixed.action = 1;
    out.push_back(make_spec("fig13", "CG(2) frequency of norm (b,b) as fixed-b agents are added", c,
                            {{"fixed_count", {"0", "5", "10", "20", "40"}}}));
    out.push_back(make_spec("fig17", "CG(2) fixed-b agents under the full hierarchy and its ablations", c,
                            {kVariants, {"fixed_count", {"0", "5", "10", "20", "40"}}}));
  }
  out.push_back(make_spec("fig14", "CG(2) on two 100-agent populations with cross-population interaction p_inter",
                          base_config(GameKind::CG, 2),
                          {{"p_inter", {"0", "0.05", "0.1", "0.15", "0.2", "0.3", "0.5", "1"}}}));
  {
    auto c = base_config(GameKind::CG, 2);
    c.topology.kind = TopologyKind::ScaleFree;
    c.fixed.action = 1;
    c.fixed.level = AgentLevel::Any;
    auto s = make_spec("fig15", "Scale-free CG(2): convergence round by fixed-agent placement metric", c,
                       {{"fixed_count", {"2", "5", "10", "20"}}, {"placement", {"random", "DC", "BC", "CC", "EC"}}});
    s.paired_seeds = true;
    out.push_back(std::move(s));
  }
  {
    auto c = base_config(GameKind::CGHP3, 3);
    c.grouping.groups = 4;
    out.push_back(make_spec("fig18", "CGHP3 under the four grouping mechanisms (4 groups where applicable)", c,
                            {{"grouping", {"random", "degree", "kmeans", "kernighan_lin"}}}));
  }
  {
    auto c = base_config(GameKind::CG, 2);
    c.topology.n = 500;
    c.grouping.kind = GroupingKind::Random;
    c.grouping.groups = 20;
    c.fixed.action = 1;
    out.push_back(make_spec("fig19", "CG(2), 500 agents in 20 groups: fixed-b agents at the supervisor or subordinate level",
                            c, {{"fixed_level", {"subordinate", "supervisor"}}, {"fixed_count", {"1", "2", "5", "10"}}}));
  }
  out.push_back(make_spec("fig20", "CGHP3 payoff dynamics: full hierarchy against its two ablations",
                          base_config(GameKind::CGHP3, 3), {kVariants}));
  out.push_back(make_spec("fig21", "CGHP(6) payoff dynamics: full hierarchy against its two ablations",
                          base_config(GameKind::CGHP, 6), {kVariants}));
  {
    auto c = base_config(GameKind::CG, 2);
    c.fixed.action = 1;
    c.fixed.level = AgentLevel::Any;
    c.fixed.trigger = InsertionTrigger::AfterConvergence;
    c.fixed.retarget = true;
    out.push_back(make_spec("fig22", "Late intervention in CG(n): fixed agents inserted once a norm has emerged", c,
                            {{"actions", {"2", "3", "4", "5", "6"}}, {"fixed_count", {"10", "30", "50", "70"}}}));
  }
  {
    auto c = base_config(GameKind::CGHP3, 3);
    c.fixed.count = 20;
    c.fixed.action = 2;
    c.fixed.placement = PlacementMetric::Eigenvector;
    c.fixed.level = AgentLevel::Any;
    c.fixed.trigger = InsertionTrigger::AfterConvergence;
    c.fixed.retarget = true;
    out.push_back(make_spec("fig23", "CGHP3 late intervention: the top-20 EC agents turn fixed once a norm has emerged",
                            c, {}));
  }
  out.push_back(make_spec("table9", "Convergence round across five topologies and four games (6 actions)",
                          base_config(GameKind::CGHP, 6),
                          {{"topology", {"grid", "ring", "random", "small_world", "scale_free"}},
                           {"game", {"CG", "ACG", "CGHP", "FSCGHP"}}}));
  out.push_back(make_spec("table10", "CGHP(6) convergence round across neighborhood sizes",
                          base_config(GameKind::CGHP, 6),
                          {{"neighborhood", {"2", "6", "8", "10", "20", "30", "50", "99"}}}));
  return out;
}

const ExperimentSpec* find_preset(const std::vector<ExperimentSpec>& catalog, std::string_view name) {
  for (const auto& s : catalog) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// JSON documents

namespace {

// Rejects keys outside `allowed` so typos surface as config errors.
void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
T get(const json& j, std::string_view where, std::string_view key) {
  try {
    return j.at(std::string(key)).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + std::string(key) + " has the wrong type");
  }
}

std::size_t get_count(const json& j, std::string_view where, std::string_view key) {
  const auto& v = j.at(std::string(key));
  if (!v.is_number_unsigned()) {
    throw ConfigError(std::string(where) + "." + std::string(key) + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

Action get_action(const json& j, std::string_view where, std::string_view key) {
  const auto& v = j.at(std::string(key));
  if (v.is_string()) return parse_action(v.get<std::string>());
  return get_count(j, where, key);
}

void read_game(const json& j, GameSpec& g) {
  check_keys(j, "game", {"kind", "n_actions", "file"});
  if (j.contains("kind")) g.kind = parse_game_kind(get<std::string>(j, "game", "kind"));
  if (g.kind == GameKind::CGHP3) g.n_actions = 3;
  if (j.contains("n_actions")) g.n_actions = get_count(j, "game", "n_actions");
  if (j.contains("file")) g.file = get<std::string>(j, "game", "file");
}

void read_topology(const json& j, TopologySpec& t) {
  check_keys(j, "topology", {"kind", "n", "mean_degree", "rewire_probability", "edge_probability", "edge_list"});
  if (j.contains("kind")) t.kind = parse_topology_kind(get<std::string>(j, "topology", "kind"));
  if (j.contains("n")) t.n = get_count(j, "topology", "n");
  if (j.contains("mean_degree")) t.params.mean_degree = get<double>(j, "topology", "mean_degree");
  if (j.contains("rewire_probability")) t.params.rewire_probability = get<double>(j, "topology", "rewire_probability");
  if (j.contains("edge_probability")) t.params.edge_probability = get<double>(j, "topology", "edge_probability");
  if (j.contains("edge_list")) t.edge_list = get<std::string>(j, "topology", "edge_list");
}

KlObjective parse_kl_objective(std::string_view s) {
  if (s == "min_cut") return KlObjective::MinCut;
  if (s == "maximize_external") return KlObjective::MaximizeExternal;
  throw ConfigError("unknown kl_objective '" + std::string(s) + "' (expected min_cut or maximize_external)");
}

std::string_view kl_objective_name(KlObjective o) {
  return o == KlObjective::MinCut ? "min_cut" : "maximize_external";
}

void read_grouping(const json& j, GroupingSpec& g) {
  check_keys(j, "grouping", {"kind", "groups", "cluster_size", "kl_objective", "kmeans"});
  if (j.contains("kind")) g.kind = parse_grouping_kind(get<std::string>(j, "grouping", "kind"));
  if (j.contains("groups")) g.groups = get_count(j, "grouping", "groups");
  if (j.contains("cluster_size")) g.cluster_size = get_count(j, "grouping", "cluster_size");
  if (j.contains("kl_objective")) g.kl_objective = parse_kl_objective(get<std::string>(j, "grouping", "kl_objective"));
  if (j.contains("kmeans")) {
    const auto& k = j.at("kmeans");
    check_keys(k, "grouping.kmeans", {"dist_max", "size_max", "max_iterations"});
    if (k.contains("dist_max")) g.kmeans.dist_max = get_count(k, "grouping.kmeans", "dist_max");
    if (k.contains("size_max")) g.kmeans.size_max = get_count(k, "grouping.kmeans", "size_max");
    if (k.contains("max_iterations")) g.kmeans.max_iterations = get_count(k, "grouping.kmeans", "max_iterations");
  }
}

void read_learner(const json& j, LearnerParams& p) {
  check_keys(j, "learner", {"alpha", "epsilon0", "beta", "gamma", "rho", "C", "delta", "epsilon_min", "epsilon_max"});
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = get<double>(j, "learner", key);
  };
  num("alpha", p.learning_rate);
  num("epsilon0", p.initial_exploration);
  num("beta", p.imitation_sharpness);
  num("gamma", p.exploration_weight);
  num("rho", p.suggestion_weight);
  num("C", p.fmq_weight);
  num("delta", p.rule_threshold);
  num("epsilon_min", p.min_exploration);
  num("epsilon_max", p.max_exploration);
}

void read_fixed(const json& j, FixedAgentSpec& f) {
  check_keys(j, "fixed", {"count", "action", "placement", "level", "trigger", "round", "offset", "retarget"});
  if (j.contains("count")) f.count = get_count(j, "fixed", "count");
  if (j.contains("action")) f.action = get_action(j, "fixed", "action");
  if (j.contains("placement")) f.placement = parse_placement_metric(get<std::string>(j, "fixed", "placement"));
  if (j.contains("level")) f.level = parse_agent_level(get<std::string>(j, "fixed", "level"));
  if (j.contains("trigger")) f.trigger = parse_insertion_trigger(get<std::string>(j, "fixed", "trigger"));
  if (j.contains("round")) f.round = get_count(j, "fixed", "round");
  if (j.contains("offset")) f.offset = get_count(j, "fixed", "offset");
  if (j.contains("retarget")) f.retarget = get<bool>(j, "fixed", "retarget");
}

SimConfig read_sim_config(const json& j) {
  check_keys(j, "config",
             {"game", "topology", "grouping", "learner", "hierarchy", "disabled_supervisor_fraction", "rounds", "seed",
              "fixed", "isolation", "convergence", "stop_at_convergence"});
  SimConfig c;
  rethrow_as_config([&] {
    if (j.contains("game")) read_game(j.at("game"), c.game);
    if (j.contains("topology")) read_topology(j.at("topology"), c.topology);
    if (j.contains("grouping")) read_grouping(j.at("grouping"), c.grouping);
    if (j.contains("learner")) read_learner(j.at("learner"), c.learner);
    if (j.contains("hierarchy")) c.hierarchy = get<bool>(j, "config", "hierarchy");
    if (j.contains("disabled_supervisor_fraction")) {
      c.disabled_supervisor_fraction = get<double>(j, "config", "disabled_supervisor_fraction");
    }
    if (j.contains("rounds")) c.rounds = get_count(j, "config", "rounds");
    if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "config", "seed");
    if (j.contains("stop_at_convergence")) c.stop_at_convergence = get<bool>(j, "config", "stop_at_convergence");
    if (j.contains("fixed")) read_fixed(j.at("fixed"), c.fixed);
    if (j.contains("isolation")) {
      const auto& i = j.at("isolation");
      check_keys(i, "isolation", {"enabled", "p_inter"});
      if (i.contains("enabled")) c.isolation.enabled = get<bool>(i, "isolation", "enabled");
      if (i.contains("p_inter")) c.isolation.p_inter = get<double>(i, "isolation", "p_inter");
    }
    if (j.contains("convergence")) {
      const auto& v = j.at("convergence");
      check_keys(v, "convergence", {"window", "threshold"});
      if (v.contains("window")) c.convergence.window = get_count(v, "convergence", "window");
      if (v.contains("threshold")) c.convergence.threshold = get<double>(v, "convergence", "threshold");
    }
    return 0;
  });
  return c;
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

json sim_config_json(const SimConfig& c) {
  json j;
  auto& g = j["game"];
  if (c.game.file) {
    g["file"] = *c.game.file;
  } else {
    g["kind"] = to_string(c.game.kind);
    g["n_actions"] = c.game.n_actions;
  }
  auto& t = j["topology"];
  if (c.topology.edge_list) {
    t["edge_list"] = *c.topology.edge_list;
  } else {
    t["kind"] = to_string(c.topology.kind);
  }
  t["n"] = c.topology.n;
  if (c.topology.params.mean_degree) t["mean_degree"] = *c.topology.params.mean_degree;
  t["rewire_probability"] = c.topology.params.rewire_probability;
  if (c.topology.params.edge_probability) t["edge_probability"] = *c.topology.params.edge_probability;
  auto& gr = j["grouping"];
  gr["kind"] = to_string(c.grouping.kind);
  if (c.grouping.groups) gr["groups"] = *c.grouping.groups;
  if (c.grouping.cluster_size) gr["cluster_size"] = *c.grouping.cluster_size;
  gr["kl_objective"] = kl_objective_name(c.grouping.kl_objective);
  auto& km = gr["kmeans"] = json::object();
  if (c.grouping.kmeans.dist_max) km["dist_max"] = *c.grouping.kmeans.dist_max;
  if (c.grouping.kmeans.size_max) km["size_max"] = *c.grouping.kmeans.size_max;
  km["max_iterations"] = c.grouping.kmeans.max_iterations;
  auto& l = j["learner"];
  l["alpha"] = c.learner.learning_rate;
  l["epsilon0"] = c.learner.initial_exploration;
  l["beta"] = c.learner.imitation_sharpness;
  l["gamma"] = c.learner.exploration_weight;
  l["rho"] = c.learner.suggestion_weight;
  l["C"] = c.learner.fmq_weight;
  l["delta"] = c.learner.rule_threshold;
  l["epsilon_min"] = c.learner.min_exploration;
  l["epsilon_max"] = c.learner.max_exploration;
  j["hierarchy"] = c.hierarchy;
  j["disabled_supervisor_fraction"] = c.disabled_supervisor_fraction;
  j["rounds"] = c.rounds;
  j["seed"] = c.seed;
  j["stop_at_convergence"] = c.stop_at_convergence;
  auto& f = j["fixed"];
  f["count"] = c.fixed.count;
  f["action"] = action_label(c.fixed.action);
  f["placement"] = to_string(c.fixed.placement);
  f["level"] = to_string(c.fixed.level);
  f["trigger"] = to_string(c.fixed.trigger);
  f["round"] = c.fixed.round;
  f["offset"] = c.fixed.offset;
  f["retarget"] = c.fixed.retarget;
  j["isolation"] = {{"enabled", c.isolation.enabled}, {"p_inter", c.isolation.p_inter}};
  j["convergence"] = {{"window", c.convergence.window}, {"threshold", c.convergence.threshold}};
  return j;
}

}  // namespace

SimConfig parse_sim_config(std::string_view json_text) {
  const auto j = parse_document(json_text);
  auto c = read_sim_config(j);
  c.validate();
  return c;
}

ExperimentSpec parse_experiment(std::string_view json_text, std::string_view default_name) {
  const auto j = parse_document(json_text);
  ExperimentSpec s;
  s.name = std::string(default_name);
  if (!j.is_object() || !j.contains("base")) {
    s.base = read_sim_config(j);
    s.validate();
    return s;
  }
  check_keys(j, "experiment", {"name", "description", "base", "sweep", "replicas", "paired_seeds", "output_dir"});
  if (j.contains("name")) s.name = get<std::string>(j, "experiment", "name");
  if (j.contains("description")) s.description = get<std::string>(j, "experiment", "description");
  s.base = read_sim_config(j.at("base"));
  if (j.contains("replicas")) s.replicas = get_count(j, "experiment", "replicas");
  if (j.contains("paired_seeds")) s.paired_seeds = get<bool>(j, "experiment", "paired_seeds");
  if (j.contains("output_dir")) s.output_dir = get<std::string>(j, "experiment", "output_dir");
  if (j.contains("sweep")) {
    const auto& sweep = j.at("sweep");
    if (!sweep.is_array()) throw ConfigError("experiment.sweep must be an array");
    for (const auto& a : sweep) {
      check_keys(a, "sweep axis", {"axis", "values"});
      SweepAxis axis;
      axis.name = get<std::string>(a, "sweep axis", "axis");
      if (!a.contains("values") || !a.at("values").is_array()) throw ConfigError("sweep axis needs a values array");
      for (const auto& v : a.at("values")) {
        if (v.is_string()) {
          axis.values.push_back(v.get<std::string>());
        } else if (v.is_number()) {
          axis.values.push_back(v.dump());
        } else {
          throw ConfigError("sweep values must be strings or numbers");
        }
      }
      s.axes.push_back(std::move(axis));
    }
  }
  s.validate();
  return s;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment(text.str(), path.stem().string());
}

std::string sim_config_to_json(const SimConfig& config) { return sim_config_json(config).dump(2); }

std::string experiment_to_json(const ExperimentSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["description"] = spec.description;
  j["replicas"] = spec.replicas;
  j["paired_seeds"] = spec.paired_seeds;
  j["base"] = sim_config_json(spec.base);
  auto& sweep = j["sweep"] = json::array();
  for (const auto& a : spec.axes) sweep.push_back({{"axis", a.name}, {"values", a.values}});
  return j.dump(2);
}

}  // namespace normsim
