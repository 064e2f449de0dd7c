#include "normsim/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace normsim {

namespace {
constexpr double kUnobserved = -std::numeric_limits<double>::infinity();
}

void LearnerParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("learner params: ") + what);
  };
  require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must be in (0, 1]");
  require(initial_exploration >= 0.0 && initial_exploration <= 1.0, "initial_exploration must be in [0, 1]");
  require(imitation_sharpness >= 0.0, "imitation_sharpness must be >= 0");
  require(exploration_weight >= 0.0, "exploration_weight must be >= 0");
  require(suggestion_weight >= 0.0, "suggestion_weight must be >= 0");
  require(fmq_weight >= 0.0, "fmq_weight must be >= 0");
  require(std::isfinite(rule_threshold), "rule_threshold must be finite");
  require(min_exploration >= 0.0 && min_exploration <= max_exploration && max_exploration <= 1.0,
          "exploration bounds must satisfy 0 <= min <= max <= 1");
}

ValueTable::ValueTable(std::size_t n_actions)
    : q(kNumRoles * n_actions, 0.0),
      r_max(kNumRoles * n_actions, kUnobserved),
      freq(kNumRoles * n_actions, 0.0),
      fmq(kNumRoles * n_actions, 0.0),
      e(kNumRoles * n_actions, 0.0),
      n_actions_(n_actions) {}

double fmq_value(double q, double freq, double r_max, double fmq_weight) {
  if (freq == 0.0) return q;
  return q + freq * r_max * fmq_weight;
}

InstructionSet InstructionSet::neutral(std::size_t n_actions) {
  InstructionSet s;
  s.n_actions = n_actions;
  s.suggestion.assign(kNumRoles * n_actions, 0.0);
  s.forbidden.assign(kNumRoles * n_actions, 0);
  return s;
}

std::size_t InstructionSet::forbidden_count(Role role) const {
  std::size_t c = 0;
  for (Action a = 0; a < n_actions; ++a) c += is_forbidden(role, a) ? 1 : 0;
  return c;
}

SubordinateState::SubordinateState(std::size_t n_actions, const LearnerParams& params)
    : values(n_actions),
      exploration(params.initial_exploration),
      count(kNumRoles * n_actions, 0),
      max_count(kNumRoles * n_actions, 0) {}

void sup_update_q(SupervisorState& state, const ExperienceReport& report, const LearnerParams& params) {
  auto& q = state.values.q[state.values.index(report.state, report.action)];
  q = (1.0 - params.learning_rate) * q + params.learning_rate * report.reward;
}

void sup_refresh_fmq(SupervisorState& state, const LearnerParams& params) {
  auto& v = state.values;
  std::fill(v.r_max.begin(), v.r_max.end(), kUnobserved);
  std::vector<std::uint32_t> seen(v.size(), 0);
  std::vector<std::uint32_t> hits(v.size(), 0);
  for (const auto& r : state.reports) {
    const auto i = v.index(r.state, r.action);
    ++seen[i];
    if (r.reward > v.r_max[i]) {
      v.r_max[i] = r.reward;
      hits[i] = 1;
    } else if (r.reward == v.r_max[i]) {
      ++hits[i];
    }
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    v.freq[i] = seen[i] == 0 ? 0.0 : static_cast<double>(hits[i]) / static_cast<double>(seen[i]);
    v.fmq[i] = fmq_value(v.q[i], v.freq[i], v.r_max[i], params.fmq_weight);
  }
}

void sup_process_reports(SupervisorState& state, const LearnerParams& params) {
  std::stable_sort(state.reports.begin(), state.reports.end(),
                   [](const ExperienceReport& a, const ExperienceReport& b) { return a.agent < b.agent; });
  for (const auto& r : state.reports) sup_update_q(state, r, params);
  sup_refresh_fmq(state, params);
  state.reports.clear();
}

double imitation_probability(double sharpness, double fmq_gap) {
  return 1.0 / (1.0 + std::exp(-sharpness * fmq_gap));
}

void sup_imitate(SupervisorState& state, std::span<const PeerView> peers, const LearnerParams& params, Rng& rng) {
  auto& v = state.values;
  double total = 0.0;
  for (const auto& p : peers) total += p.weight;
  if (peers.empty() || !(total > 0.0)) {
    v.e = v.fmq;
    return;
  }
  const double u = rng.uniform() * total;
  const ValueTable* peer = peers.back().values;
  double acc = 0.0;
  for (const auto& p : peers) {
    acc += p.weight;
    if (u < acc) {
      peer = p.values;
      break;
    }
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double p = imitation_probability(params.imitation_sharpness, peer->fmq[i] - v.fmq[i]);
    v.e[i] = (1.0 - p) * v.fmq[i] + p * peer->fmq[i];
  }
}

InstructionSet instructions_from_values(std::span<const double> values, std::size_t n_actions,
                                        const LearnerParams& params) {
  InstructionSet out = InstructionSet::neutral(n_actions);
  const double m = static_cast<double>(n_actions);
  for (std::size_t s = 0; s < kNumRoles; ++s) {
    const auto row = values.subspan(s * n_actions, n_actions);
    double mean = 0.0;
    for (double x : row) mean += x;
    mean /= m;
    double var = 0.0;
    for (double x : row) var += (x - mean) * (x - mean);
    const double sigma = std::sqrt(var / m);
    if (!(sigma > 0.0)) continue;
    for (Action a = 0; a < n_actions; ++a) {
      const double z = (row[a] - mean) / sigma;
      out.suggestion[s * n_actions + a] = z;
      out.forbidden[s * n_actions + a] = z < params.rule_threshold ? 1 : 0;
    }
  }
  return out;
}

InstructionSet sup_generate_instructions(const SupervisorState& state, const LearnerParams& params) {
  return instructions_from_values(state.values.e, state.values.n_actions(), params);
}

void sub_update_q(SubordinateState& state, Role role, Action action, double reward, const LearnerParams& params) {
  auto& v = state.values;
  const auto i = v.index(role, action);
  v.q[i] = (1.0 - params.learning_rate) * v.q[i] + params.learning_rate * reward;
  ++state.count[i];
  if (state.count[i] == 1 || reward > v.r_max[i]) {
    v.r_max[i] = reward;
    state.max_count[i] = 1;
  } else if (reward == v.r_max[i]) {
    ++state.max_count[i];
  }
  v.freq[i] = static_cast<double>(state.max_count[i]) / static_cast<double>(state.count[i]);
}

void sub_refresh_fmq(SubordinateState& state, const LearnerParams& params) {
  auto& v = state.values;
  for (std::size_t i = 0; i < v.size(); ++i) v.fmq[i] = fmq_value(v.q[i], v.freq[i], v.r_max[i], params.fmq_weight);
}

void sub_apply_suggestions(SubordinateState& state, const InstructionSet& instr, const LearnerParams& params) {
  auto& v = state.values;
  for (std::size_t i = 0; i < v.size(); ++i) v.e[i] = v.fmq[i] * (1.0 + instr.suggestion[i] * params.suggestion_weight);
}

void sub_update_exploration(SubordinateState& state, const InstructionSet& instr, Role role, Action action,
                            const LearnerParams& params) {
  const double eps = state.exploration * (1.0 - instr.degree(role, action) * params.exploration_weight);
  state.exploration = std::clamp(eps, params.min_exploration, params.max_exploration);
}

namespace {

struct Candidates {
  bool ignore_rules = false;
  std::size_t allowed = 0;
  std::size_t ties = 0;
  double best = 0.0;
};

Candidates scan(const SubordinateState& state, Role role, const InstructionSet& instr) {
  const std::size_t n = state.values.n_actions();
  Candidates c;
  c.ignore_rules = instr.forbidden_count(role) == n;
  c.best = -std::numeric_limits<double>::infinity();
  for (Action a = 0; a < n; ++a) {
    if (!c.ignore_rules && instr.is_forbidden(role, a)) continue;
    ++c.allowed;
    const double e = state.values.e[state.values.index(role, a)];
    if (e > c.best) {
      c.best = e;
      c.ties = 1;
    } else if (e == c.best) {
      ++c.ties;
    }
  }
  return c;
}

}  // namespace

std::vector<double> action_distribution(const SubordinateState& state, Role role, const InstructionSet& instr) {
  const std::size_t n = state.values.n_actions();
  const auto c = scan(state, role, instr);
  std::vector<double> p(n, 0.0);
  auto allowed = [&](Action a) { return c.ignore_rules || !instr.is_forbidden(role, a); };
  const std::size_t others = c.allowed - 1;
  const double eps = state.exploration;
  for (Action g = 0; g < n; ++g) {
    if (!allowed(g) || state.values.e[state.values.index(role, g)] != c.best) continue;
    const double w = 1.0 / static_cast<double>(c.ties);
    if (others == 0) {
      p[g] += w;
      continue;
    }
    p[g] += w * (1.0 - eps);
    for (Action a = 0; a < n; ++a) {
      if (a != g && allowed(a)) p[a] += w * eps / static_cast<double>(others);
    }
  }
  return p;
}

Selection sub_select_action(const SubordinateState& state, Role role, const InstructionSet& instr, Rng& rng) {
  const std::size_t n = state.values.n_actions();
  const auto c = scan(state, role, instr);
  auto allowed = [&](Action a) { return c.ignore_rules || !instr.is_forbidden(role, a); };

  std::size_t pick = c.ties > 1 ? rng.index(c.ties) : 0;
  Action greedy = 0;
  for (Action a = 0; a < n; ++a) {
    if (!allowed(a) || state.values.e[state.values.index(role, a)] != c.best) continue;
    if (pick-- == 0) {
      greedy = a;
      break;
    }
  }

  const std::size_t others = c.allowed - 1;
  const bool explore = rng.uniform() < state.exploration;
  if (!explore || others == 0) return {greedy, c.ignore_rules};
  std::size_t k = rng.index(others);
  for (Action a = 0; a < n; ++a) {
    if (a == greedy || !allowed(a)) continue;
    if (k-- == 0) return {a, c.ignore_rules};
  }
  return {greedy, c.ignore_rules};
}

}  // namespace normsim
