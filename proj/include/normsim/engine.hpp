#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "normsim/games.hpp"
#include "normsim/grouping.hpp"
#include "normsim/learners.hpp"
#include "normsim/metrics.hpp"
#include "normsim/rng.hpp"
#include "normsim/topology.hpp"

namespace normsim {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GameSpec {
  GameKind kind = GameKind::CGHP;
  std::size_t n_actions = 6;
  std::optional<std::string> file;  // JSON game document; overrides kind
};

struct TopologySpec {
  TopologyKind kind = TopologyKind::SmallWorld;
  std::size_t n = 100;  // per sub-population
  TopologyParams params;
  std::optional<std::string> edge_list;  // fixture file; overrides kind
};

struct GroupingSpec {
  GroupingKind kind = GroupingKind::Degree;
  // Group count for random / k-means / Kernighan-Lin. When unset, derived
  // from cluster_size, or 4 if neither is given.
  std::optional<std::size_t> groups;
  std::optional<std::size_t> cluster_size;
  KMeansOptions kmeans;
  KlObjective kl_objective = KlObjective::MinCut;
};

enum class PlacementMetric { Random, Degree, Betweenness, Closeness, Eigenvector };
enum class AgentLevel { Any, Subordinate, Supervisor };
enum class InsertionTrigger { Start, Round, AfterConvergence };

std::string_view to_string(PlacementMetric m);
PlacementMetric parse_placement_metric(std::string_view name);
std::string_view to_string(AgentLevel l);
AgentLevel parse_agent_level(std::string_view name);
std::string_view to_string(InsertionTrigger t);
InsertionTrigger parse_insertion_trigger(std::string_view name);

struct FixedAgentSpec {
  std::size_t count = 0;
  Action action = 1;
  PlacementMetric placement = PlacementMetric::Random;
  AgentLevel level = AgentLevel::Subordinate;
  InsertionTrigger trigger = InsertionTrigger::Start;
  std::size_t round = 0;   // InsertionTrigger::Round
  std::size_t offset = 0;  // InsertionTrigger::AfterConvergence
  // AfterConvergence only: play the lowest-index action of another optimal
  // diagonal norm instead of `action`, so the intervention always opposes
  // the norm that emerged.
  bool retarget = false;
};

struct IsolationSpec {
  bool enabled = false;
  double p_inter = 0.0;
};

struct ConvergenceSpec {
  std::size_t window = 10;
  double threshold = 0.9;
};

struct SimConfig {
  GameSpec game;
  TopologySpec topology;
  GroupingSpec grouping;
  LearnerParams learner;
  bool hierarchy = true;  // false: no supervisors at all
  double disabled_supervisor_fraction = 0.0;
  std::size_t rounds = 2000;
  std::uint64_t seed = 1;
  FixedAgentSpec fixed;
  IsolationSpec isolation;
  ConvergenceSpec convergence;
  bool keep_trace = true;
  bool record_interactions = false;
  // End the run on the round convergence is first detected, unless a
  // late intervention is still pending. The payoff series is truncated.
  bool stop_at_convergence = false;

  void validate() const;
};

struct Interaction {
  NodeId initiator = 0;
  NodeId partner = 0;
  NodeId row_agent = 0;
  NodeId col_agent = 0;
  JointAction joint;
  double row_payoff = 0.0;
  double col_payoff = 0.0;
};

struct RoundRecord {
  std::size_t round = 0;
  std::size_t interactions = 0;
  std::size_t reports = 0;
  double average_payoff = 0.0;
  std::vector<std::uint32_t> joint_counts;  // n_actions x n_actions, row-major
  // One histogram per sub-population, keyed by the initiator's population.
  std::vector<std::vector<std::uint32_t>> population_counts;
  std::vector<Interaction> details;  // only with record_interactions
  std::size_t rules_ignored = 0;
};

struct Agent {
  SubordinateState learner;
  std::optional<Action> fixed;
  std::size_t population = 0;
  Role initiated_role = Role::Row;
  Action initiated_action = 0;
};

// One replica's mutable state. Built from a SimConfig; owns every learner.
class World {
 public:
  World(const SimConfig& config, Game game);

  const Game& game() const { return game_; }
  const Graph& graph() const { return graph_; }
  const std::optional<Grouping>& grouping() const { return grouping_; }
  const SimConfig& config() const { return config_; }
  std::size_t num_agents() const { return agents_.size(); }
  std::size_t num_populations() const { return population_start_.size(); }
  std::size_t round() const { return round_; }

  const Agent& agent(NodeId v) const { return agents_[v]; }
  const SupervisorState& supervisor(GroupId g) const { return supervisors_[g]; }
  const InstructionSet& instructions(GroupId g) const { return instructions_[g]; }
  bool supervisor_enabled(GroupId g) const { return enabled_[g] != 0; }

  // Agents eligible for fixed-strategy conversion at `level`.
  std::vector<NodeId> eligible(AgentLevel level) const;
  void make_fixed(NodeId v, Action action);
  void disable_supervisor(GroupId g);

  // Instructions that govern `v`'s next selection; neutral without an
  // enabled supervisor.
  const InstructionSet& instructions_for(NodeId v) const;

  RoundRecord run_round(Rng& rng);

 private:
  NodeId choose_partner(NodeId i, Rng& rng) const;
  Action act(NodeId v, Role role, Rng& rng, RoundRecord& rec);
  void learn(NodeId v, Role role, Action action, double reward, RoundRecord& rec);
  void supervise(Rng& rng);
  void instruct();

  SimConfig config_;
  Game game_;
  Graph graph_;
  std::optional<Grouping> grouping_;
  std::vector<Agent> agents_;
  std::vector<std::size_t> population_start_;
  std::vector<SupervisorState> supervisors_;
  std::vector<InstructionSet> instructions_;
  std::vector<std::uint8_t> enabled_;
  InstructionSet neutral_;
  std::size_t round_ = 0;
};

Game build_game(const GameSpec& spec);
Graph build_graph(const TopologySpec& spec, std::uint64_t seed);
Grouping build_grouping(const Graph& graph, const GroupingSpec& spec, std::uint64_t seed);

// Scores for placement; Random yields an empty vector.
std::vector<double> placement_scores(const Graph& graph, PlacementMetric metric);

// Converts the `count` top-ranked eligible agents (descending score, ties by
// lowest id; uniform sample for Random) into Fixed(action).
std::vector<NodeId> place_fixed_agents(World& world, std::size_t count, Action action, PlacementMetric metric,
                                       AgentLevel level, Rng& rng);

// Optimal norm realized by at least `threshold` of the counted interactions.
std::optional<JointAction> dominant_norm(const Game& game, std::span<const std::uint32_t> joint_counts,
                                         double threshold);

// Incremental form of detect_convergence.
class ConvergenceTracker {
 public:
  ConvergenceTracker(const Game& game, ConvergenceSpec spec) : game_(&game), spec_(spec) {}

  // Returns true on the round at which convergence first becomes known.
  bool observe(std::size_t round, std::span<const std::uint32_t> joint_counts);

  std::optional<std::size_t> converged_round() const { return converged_round_; }
  std::optional<JointAction> norm() const { return norm_; }
  // Norm held over the most recent `window` rounds, if any.
  std::optional<JointAction> current_norm() const;

 private:
  const Game* game_;
  ConvergenceSpec spec_;
  std::optional<JointAction> streak_norm_;
  std::size_t streak_start_ = 0;
  std::size_t streak_len_ = 0;
  std::optional<std::size_t> converged_round_;
  std::optional<JointAction> norm_;
};

struct ConvergenceResult {
  std::optional<std::size_t> round;
  std::optional<JointAction> norm;
};

// Earliest round r from which `window` consecutive rounds each have a single
// optimal norm realized by at least `threshold` of interactions.
ConvergenceResult detect_convergence(std::span<const RoundRecord> trace, const Game& game, std::size_t window = 10,
                                     double threshold = 0.9, std::size_t start_round = 0);

struct SimResult {
  std::vector<RoundRecord> trace;
  RunSummary summary;
};

SimResult run_simulation(const SimConfig& config);
SimResult run_simulation(const SimConfig& config, const Game& game);

// Two sub-populations with cross-population interaction probability p_inter;
// returns each population's final norm.
std::vector<std::optional<JointAction>> run_isolated(SimConfig config, double p_inter);

}  // namespace normsim
