#include "normsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace normsim {

std::string_view to_string(PlacementMetric m) {
  switch (m) {
    case PlacementMetric::Random: return "random";
    case PlacementMetric::Degree: return "DC";
    case PlacementMetric::Betweenness: return "BC";
    case PlacementMetric::Closeness: return "CC";
    case PlacementMetric::Eigenvector: return "EC";
  }
  return "?";
}

PlacementMetric parse_placement_metric(std::string_view name) {
  for (auto m : {PlacementMetric::Random, PlacementMetric::Degree, PlacementMetric::Betweenness,
                 PlacementMetric::Closeness, PlacementMetric::Eigenvector}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown placement metric '" + std::string(name) + "' (expected random, DC, BC, CC or EC)");
}

std::string_view to_string(AgentLevel l) {
  switch (l) {
    case AgentLevel::Any: return "any";
    case AgentLevel::Subordinate: return "subordinate";
    case AgentLevel::Supervisor: return "supervisor";
  }
  return "?";
}

AgentLevel parse_agent_level(std::string_view name) {
  for (auto l : {AgentLevel::Any, AgentLevel::Subordinate, AgentLevel::Supervisor}) {
    if (to_string(l) == name) return l;
  }
  throw ConfigError("unknown agent level '" + std::string(name) + "' (expected any, subordinate or supervisor)");
}

std::string_view to_string(InsertionTrigger t) {
  switch (t) {
    case InsertionTrigger::Start: return "start";
    case InsertionTrigger::Round: return "round";
    case InsertionTrigger::AfterConvergence: return "after_convergence";
  }
  return "?";
}

InsertionTrigger parse_insertion_trigger(std::string_view name) {
  for (auto t : {InsertionTrigger::Start, InsertionTrigger::Round, InsertionTrigger::AfterConvergence}) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("unknown insertion trigger '" + std::string(name) + "' (expected start, round or after_convergence)");
}

void SimConfig::validate() const {
  try {
    learner.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!game.file && game.n_actions < 2) throw ConfigError("game needs at least 2 actions");
  if (!topology.edge_list && topology.n < 2) throw ConfigError("population needs at least 2 agents");
  if (!(disabled_supervisor_fraction >= 0.0 && disabled_supervisor_fraction <= 1.0)) {
    throw ConfigError("disabled_supervisor_fraction must be in [0, 1]");
  }
  if (!(isolation.p_inter >= 0.0 && isolation.p_inter <= 1.0)) throw ConfigError("p_inter must be in [0, 1]");
  if (convergence.window < 1) throw ConfigError("convergence window must be at least 1");
  if (!(convergence.threshold > 0.5 && convergence.threshold <= 1.0)) {
    throw ConfigError("convergence threshold must be in (0.5, 1]");
  }
  if (fixed.trigger == InsertionTrigger::Round && fixed.round > rounds) {
    throw ConfigError("fixed-agent insertion round exceeds the number of rounds");
  }
  if (fixed.count > 0 && fixed.level == AgentLevel::Supervisor && !hierarchy) {
    throw ConfigError("supervisor-level fixed agents need the hierarchy");
  }
  if (grouping.cluster_size && *grouping.cluster_size == 0) throw ConfigError("cluster_size must be positive");
  if (grouping.groups && *grouping.groups == 0) throw ConfigError("group count must be positive");
}

Game build_game(const GameSpec& spec) {
  if (spec.file) return load_game(*spec.file);
  return make_builtin(spec.kind, spec.n_actions);
}

Graph build_graph(const TopologySpec& spec, std::uint64_t seed) {
  if (spec.edge_list) return load_edge_list(*spec.edge_list);
  return generate(spec.kind, spec.n, spec.params, seed);
}

Grouping build_grouping(const Graph& graph, const GroupingSpec& spec, std::uint64_t seed) {
  const std::size_t n = graph.num_nodes();
  std::size_t k = 4;
  if (spec.groups) {
    k = *spec.groups;
  } else if (spec.cluster_size) {
    k = std::max<std::size_t>(1, (n + *spec.cluster_size / 2) / *spec.cluster_size);
  }
  k = std::min(k, n);
  switch (spec.kind) {
    case GroupingKind::Random: return group_random(graph, k, seed);
    case GroupingKind::Degree: return group_degree(graph, seed);
    case GroupingKind::KMeans: return group_kmeans(graph, k, spec.kmeans, seed);
    case GroupingKind::KernighanLin: return group_kernighan_lin(graph, k, seed, spec.kl_objective);
  }
  throw ConfigError("unsupported grouping");
}

namespace {

InstructionSet fixed_supervisor_instructions(std::size_t n_actions, Action action, const LearnerParams& params) {
  std::vector<double> values(kNumRoles * n_actions, -1.0);
  for (std::size_t s = 0; s < kNumRoles; ++s) values[s * n_actions + action] = 1.0;
  return instructions_from_values(values, n_actions, params);
}

}  // namespace

World::World(const SimConfig& config, Game game)
    : config_(config), game_(std::move(game)), neutral_(InstructionSet::neutral(game_.n_actions())) {
  const std::uint64_t seed = config_.seed;
  const std::size_t pops = config_.isolation.enabled ? 2 : 1;
  std::vector<Graph> parts;
  std::size_t total = 0;
  for (std::size_t p = 0; p < pops; ++p) {
    parts.push_back(build_graph(config_.topology, derive_seed(seed, "topology/" + std::to_string(p))));
    population_start_.push_back(total);
    total += parts.back().num_nodes();
  }
  graph_ = Graph(total);
  for (std::size_t p = 0; p < pops; ++p) {
    for (auto [u, v] : parts[p].edges()) graph_.add_edge(population_start_[p] + u, population_start_[p] + v);
  }
  for (NodeId v = 0; v < total; ++v) {
    if (graph_.degree(v) == 0) throw ConfigError("agent " + std::to_string(v) + " has no neighbors");
  }

  agents_.resize(total);
  for (std::size_t p = 0; p < pops; ++p) {
    for (NodeId v = 0; v < parts[p].num_nodes(); ++v) agents_[population_start_[p] + v].population = p;
  }
  for (auto& a : agents_) a.learner = SubordinateState(game_.n_actions(), config_.learner);

  if (config_.hierarchy) {
    std::vector<GroupId> assign(total);
    std::vector<NodeId> supervisors;
    for (std::size_t p = 0; p < pops; ++p) {
      const auto local = build_grouping(parts[p], config_.grouping, derive_seed(seed, "grouping/" + std::to_string(p)));
      const GroupId offset = supervisors.size();
      for (NodeId v = 0; v < parts[p].num_nodes(); ++v) {
        assign[population_start_[p] + v] = offset + local.group_of_node[v];
      }
      for (NodeId s : local.supervisor_of_group) supervisors.push_back(population_start_[p] + s);
    }
    grouping_ = make_grouping(graph_, assign, supervisors);
    const std::size_t groups = grouping_->num_groups();
    supervisors_.assign(groups, SupervisorState(game_.n_actions()));
    instructions_.assign(groups, neutral_);
    enabled_.assign(groups, 1);

    const auto disabled = static_cast<std::size_t>(
        std::llround(config_.disabled_supervisor_fraction * static_cast<double>(groups)));
    if (disabled > 0) {
      std::vector<GroupId> order(groups);
      std::iota(order.begin(), order.end(), 0);
      Rng pick(derive_seed(seed, "disabled"));
      pick.shuffle(order.begin(), order.end());
      for (std::size_t i = 0; i < disabled; ++i) disable_supervisor(order[i]);
    }
  }
}

std::vector<NodeId> World::eligible(AgentLevel level) const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < agents_.size(); ++v) {
    if (agents_[v].fixed) continue;
    const bool sup = grouping_ && grouping_->is_supervisor(v);
    if (level == AgentLevel::Any || (level == AgentLevel::Supervisor && sup) ||
        (level == AgentLevel::Subordinate && !sup)) {
      out.push_back(v);
    }
  }
  return out;
}

void World::make_fixed(NodeId v, Action action) {
  if (action >= game_.n_actions()) throw ConfigError("fixed action out of range");
  agents_[v].fixed = action;
}

void World::disable_supervisor(GroupId g) {
  enabled_[g] = 0;
  supervisors_[g].reports.clear();
  instructions_[g] = neutral_;
}

const InstructionSet& World::instructions_for(NodeId v) const {
  if (!grouping_) return neutral_;
  const GroupId g = grouping_->group_of_node[v];
  return enabled_[g] ? instructions_[g] : neutral_;
}

NodeId World::choose_partner(NodeId i, Rng& rng) const {
  if (config_.isolation.enabled) {
    if (rng.bernoulli(config_.isolation.p_inter)) {
      const std::size_t other = 1 - agents_[i].population;
      const std::size_t start = population_start_[other];
      const std::size_t end = other + 1 < population_start_.size() ? population_start_[other + 1] : agents_.size();
      return start + rng.index(end - start);
    }
  }
  const auto nb = graph_.neighbors(i);
  return nb[rng.index(nb.size())];
}

Action World::act(NodeId v, Role role, Rng& rng, RoundRecord& rec) {
  const auto& a = agents_[v];
  if (a.fixed) return *a.fixed;
  const auto sel = sub_select_action(a.learner, role, instructions_for(v), rng);
  if (sel.rules_ignored) ++rec.rules_ignored;
  return sel.action;
}

void World::learn(NodeId v, Role role, Action action, double reward, RoundRecord& rec) {
  auto& a = agents_[v];
  if (a.fixed) return;
  sub_update_q(a.learner, role, action, reward, config_.learner);
  if (!grouping_) return;
  const GroupId g = grouping_->group_of_node[v];
  if (!enabled_[g] || agents_[grouping_->supervisor_of_group[g]].fixed) return;
  supervisors_[g].reports.push_back({v, role, action, reward});
  ++rec.reports;
}

RoundRecord World::run_round(Rng& rng) {
  const std::size_t m = game_.n_actions();
  const std::size_t n = agents_.size();
  RoundRecord rec;
  rec.round = round_;
  rec.joint_counts.assign(m * m, 0);
  if (num_populations() > 1) rec.population_counts.assign(num_populations(), std::vector<std::uint32_t>(m * m, 0));
  double payoff_sum = 0.0;

  for (NodeId i = 0; i < n; ++i) {
    const NodeId j = choose_partner(i, rng);
    const bool i_is_row = rng.bernoulli(0.5);
    const NodeId row = i_is_row ? i : j;
    const NodeId col = i_is_row ? j : i;
    const Action a_row = act(row, Role::Row, rng, rec);
    const Action a_col = act(col, Role::Column, rng, rec);
    const auto [p_row, p_col] = sample_payoff(game_, a_row, a_col, rng);
    learn(row, Role::Row, a_row, p_row, rec);
    learn(col, Role::Column, a_col, p_col, rec);

    agents_[i].initiated_role = i_is_row ? Role::Row : Role::Column;
    agents_[i].initiated_action = i_is_row ? a_row : a_col;

    ++rec.joint_counts[a_row * m + a_col];
    if (!rec.population_counts.empty()) ++rec.population_counts[agents_[i].population][a_row * m + a_col];
    payoff_sum += p_row + p_col;
    if (config_.record_interactions) rec.details.push_back({i, j, row, col, {a_row, a_col}, p_row, p_col});
  }
  rec.interactions = n;
  rec.average_payoff = n == 0 ? 0.0 : payoff_sum / (2.0 * static_cast<double>(n));

  if (grouping_) supervise(rng);
  instruct();
  ++round_;
  return rec;
}

void World::supervise(Rng& rng) {
  const std::size_t groups = grouping_->num_groups();
  auto learning = [&](GroupId g) { return enabled_[g] && !agents_[grouping_->supervisor_of_group[g]].fixed; };

  for (GroupId g = 0; g < groups; ++g) {
    if (learning(g)) {
      sup_process_reports(supervisors_[g], config_.learner);
    } else {
      supervisors_[g].reports.clear();
    }
  }
  std::vector<PeerView> peers;
  for (GroupId g = 0; g < groups; ++g) {
    if (!learning(g)) continue;
    peers.clear();
    for (const auto& link : grouping_->links[g]) {
      if (learning(link.group)) peers.push_back({&supervisors_[link.group].values, link.degree});
    }
    sup_imitate(supervisors_[g], peers, config_.learner, rng);
  }
  for (GroupId g = 0; g < groups; ++g) {
    if (!enabled_[g]) continue;
    const auto& sup_agent = agents_[grouping_->supervisor_of_group[g]];
    instructions_[g] = sup_agent.fixed
                           ? fixed_supervisor_instructions(game_.n_actions(), *sup_agent.fixed, config_.learner)
                           : sup_generate_instructions(supervisors_[g], config_.learner);
  }
}

void World::instruct() {
  for (NodeId v = 0; v < agents_.size(); ++v) {
    auto& a = agents_[v];
    if (a.fixed) continue;
    sub_refresh_fmq(a.learner, config_.learner);
    const bool guided = grouping_ && enabled_[grouping_->group_of_node[v]];
    if (!guided) {
      a.learner.values.e = a.learner.values.fmq;
      continue;
    }
    const auto& instr = instructions_[grouping_->group_of_node[v]];
    sub_apply_suggestions(a.learner, instr, config_.learner);
    sub_update_exploration(a.learner, instr, a.initiated_role, a.initiated_action, config_.learner);
  }
}

std::vector<double> placement_scores(const Graph& graph, PlacementMetric metric) {
  switch (metric) {
    case PlacementMetric::Random: return {};
    case PlacementMetric::Degree: return centrality(graph, CentralityMetric::Degree).scores;
    case PlacementMetric::Betweenness: return centrality(graph, CentralityMetric::Betweenness).scores;
    case PlacementMetric::Closeness: return centrality(graph, CentralityMetric::Closeness).scores;
    case PlacementMetric::Eigenvector: return centrality(graph, CentralityMetric::Eigenvector).scores;
  }
  return {};
}

std::vector<NodeId> place_fixed_agents(World& world, std::size_t count, Action action, PlacementMetric metric,
                                       AgentLevel level, Rng& rng) {
  auto pool = world.eligible(level);
  if (count > pool.size()) {
    throw ConfigError("cannot place " + std::to_string(count) + " fixed agents: only " + std::to_string(pool.size()) +
                      " eligible at level " + std::string(to_string(level)));
  }
  if (metric == PlacementMetric::Random) {
    rng.shuffle(pool.begin(), pool.end());
    pool.resize(count);
  } else {
    const auto scores = placement_scores(world.graph(), metric);
    std::stable_sort(pool.begin(), pool.end(), [&](NodeId a, NodeId b) { return scores[a] > scores[b]; });
    pool.resize(count);
  }
  std::sort(pool.begin(), pool.end());
  for (NodeId v : pool) world.make_fixed(v, action);
  return pool;
}

std::optional<JointAction> dominant_norm(const Game& game, std::span<const std::uint32_t> joint_counts,
                                         double threshold) {
  const std::size_t m = game.n_actions();
  std::uint64_t total = 0;
  for (auto c : joint_counts) total += c;
  if (total == 0) return std::nullopt;
  for (auto j : game.optimal_norms()) {
    if (static_cast<double>(joint_counts[j.row * m + j.col]) >= threshold * static_cast<double>(total)) return j;
  }
  return std::nullopt;
}

bool ConvergenceTracker::observe(std::size_t round, std::span<const std::uint32_t> joint_counts) {
  const auto norm = dominant_norm(*game_, joint_counts, spec_.threshold);
  if (norm && streak_norm_ == norm && streak_start_ + streak_len_ == round) {
    ++streak_len_;
  } else if (norm) {
    streak_norm_ = norm;
    streak_start_ = round;
    streak_len_ = 1;
  } else {
    streak_norm_.reset();
    streak_len_ = 0;
  }
  if (!converged_round_ && streak_len_ >= spec_.window) {
    converged_round_ = streak_start_;
    norm_ = streak_norm_;
    return true;
  }
  return false;
}

std::optional<JointAction> ConvergenceTracker::current_norm() const {
  if (streak_len_ >= spec_.window) return streak_norm_;
  return std::nullopt;
}

ConvergenceResult detect_convergence(std::span<const RoundRecord> trace, const Game& game, std::size_t window,
                                     double threshold, std::size_t start_round) {
  ConvergenceTracker tracker(game, {window, threshold});
  for (const auto& rec : trace) {
    if (rec.round < start_round) continue;
    if (tracker.observe(rec.round, rec.joint_counts)) break;
  }
  return {tracker.converged_round(), tracker.norm()};
}

namespace {

Action greedy_action(const SubordinateState& s, Role role) {
  const std::size_t m = s.values.n_actions();
  Action best = 0;
  for (Action a = 1; a < m; ++a) {
    if (s.values.e[s.values.index(role, a)] > s.values.e[s.values.index(role, best)]) best = a;
  }
  return best;
}

Action opposing_action(const Game& game, JointAction norm, Action fallback) {
  for (auto j : game.optimal_norms()) {
    if (j.row == j.col && j.row != norm.row) return j.row;
  }
  return fallback;
}

}  // namespace

SimResult run_simulation(const SimConfig& config) {
  config.validate();
  return run_simulation(config, build_game(config.game));
}

SimResult run_simulation(const SimConfig& config, const Game& game) {
  config.validate();
  if (config.fixed.count > 0 && config.fixed.action >= game.n_actions()) {
    throw ConfigError("fixed action " + std::to_string(config.fixed.action) + " out of range");
  }
  World world(config, game);
  Rng rng(derive_seed(config.seed, "simulation"));
  Rng placement_rng(derive_seed(config.seed, "placement"));

  SimResult result;
  auto& summary = result.summary;
  summary.seed = config.seed;
  summary.payoff_series.reserve(config.rounds);

  ConvergenceTracker tracker(world.game(), config.convergence);
  std::optional<ConvergenceTracker> after;
  std::vector<ConvergenceTracker> per_population;
  if (world.num_populations() > 1) {
    for (std::size_t p = 0; p < world.num_populations(); ++p) per_population.emplace_back(world.game(), config.convergence);
  }

  constexpr std::size_t kNever = static_cast<std::size_t>(-1);
  std::size_t insert_at = kNever;
  Action fixed_action = config.fixed.action;
  if (config.fixed.count > 0) {
    if (config.fixed.trigger == InsertionTrigger::Start) insert_at = 0;
    if (config.fixed.trigger == InsertionTrigger::Round) insert_at = config.fixed.round;
  }

  for (std::size_t r = 0; r < config.rounds; ++r) {
    if (insert_at == r) {
      place_fixed_agents(world, config.fixed.count, fixed_action, config.fixed.placement, config.fixed.level,
                         placement_rng);
      if (config.fixed.trigger != InsertionTrigger::Start) {
        summary.intervention_round = r;
        summary.intervention_action = fixed_action;
        after.emplace(world.game(), config.convergence);
      }
      insert_at = kNever;
    }
    auto rec = world.run_round(rng);
    summary.payoff_series.push_back(rec.average_payoff);
    const bool fired = tracker.observe(r, rec.joint_counts);
    if (fired && config.fixed.count > 0 && config.fixed.trigger == InsertionTrigger::AfterConvergence) {
      insert_at = r + 1 + config.fixed.offset;
      if (config.fixed.retarget) fixed_action = opposing_action(world.game(), *tracker.norm(), fixed_action);
    }
    if (after && after->observe(r, rec.joint_counts)) {
      summary.reconverged_round = after->converged_round();
      summary.reconverged_norm = after->norm();
    }
    for (std::size_t p = 0; p < per_population.size(); ++p) per_population[p].observe(r, rec.population_counts[p]);
    if (config.keep_trace) result.trace.push_back(std::move(rec));
    if (config.stop_at_convergence && tracker.converged_round() && insert_at == kNever &&
        (!summary.intervention_round || summary.reconverged_round)) {
      break;
    }
  }

  summary.converged_round = tracker.converged_round();
  summary.norm = tracker.norm();
  summary.final_norm = tracker.current_norm();
  const std::size_t tail = std::min(config.convergence.window, summary.payoff_series.size());
  if (tail > 0) {
    summary.final_payoff =
        std::accumulate(summary.payoff_series.end() - static_cast<std::ptrdiff_t>(tail), summary.payoff_series.end(), 0.0) /
        static_cast<double>(tail);
  }
  for (const auto& t : per_population) summary.population_norms.push_back(t.current_norm());
  if (summary.final_norm) {
    std::size_t learners = 0;
    std::size_t matching = 0;
    for (NodeId v = 0; v < world.num_agents(); ++v) {
      const auto& a = world.agent(v);
      if (a.fixed) continue;
      ++learners;
      if (greedy_action(a.learner, Role::Row) == summary.final_norm->row &&
          greedy_action(a.learner, Role::Column) == summary.final_norm->col) {
        ++matching;
      }
    }
    summary.policy_match = learners == 0 ? 0.0 : static_cast<double>(matching) / static_cast<double>(learners);
  }
  return result;
}

std::vector<std::optional<JointAction>> run_isolated(SimConfig config, double p_inter) {
  config.isolation.enabled = true;
  config.isolation.p_inter = p_inter;
  config.keep_trace = false;
  return run_simulation(config).summary.population_norms;
}

}  // namespace normsim
