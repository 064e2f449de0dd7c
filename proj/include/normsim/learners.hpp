#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "normsim/games.hpp"
#include "normsim/rng.hpp"
#include "normsim/topology.hpp"

namespace normsim {

struct LearnerParams {
  double learning_rate = 0.99;        // alpha
  double initial_exploration = 0.93;  // epsilon at round 0
  double imitation_sharpness = 0.1;   // beta, supervisor peer imitation
  double exploration_weight = 0.05;   // gamma, suggestion effect on epsilon
  double suggestion_weight = 0.01;    // rho, suggestion effect on E-values
  double fmq_weight = 10.0;           // C
  double rule_threshold = -0.5;       // delta
  double min_exploration = 0.01;
  double max_exploration = 0.99;

  void validate() const;
};

// Per (role, action) estimates shared by supervisors and subordinates.
class ValueTable {
 public:
  explicit ValueTable(std::size_t n_actions = 0);

  std::size_t n_actions() const { return n_actions_; }
  std::size_t size() const { return q.size(); }
  std::size_t index(Role role, Action a) const { return role_index(role) * n_actions_ + a; }

  std::vector<double> q;
  std::vector<double> r_max;  // -inf until the pair is observed
  std::vector<double> freq;   // in [0, 1]
  std::vector<double> fmq;
  std::vector<double> e;

 private:
  std::size_t n_actions_ = 0;
};

// FMQ = Q + freq * r_max * C; unobserved pairs (freq 0) give FMQ = Q.
double fmq_value(double q, double freq, double r_max, double fmq_weight);

struct ExperienceReport {
  NodeId agent = 0;
  Role state = Role::Row;
  Action action = 0;
  double reward = 0.0;
};

// Rules (forbidden pairs) plus a recommendation degree for every pair.
struct InstructionSet {
  std::size_t n_actions = 0;
  std::vector<double> suggestion;
  std::vector<std::uint8_t> forbidden;

  static InstructionSet neutral(std::size_t n_actions);

  std::size_t index(Role role, Action a) const { return role_index(role) * n_actions + a; }
  double degree(Role role, Action a) const { return suggestion[index(role, a)]; }
  bool is_forbidden(Role role, Action a) const { return forbidden[index(role, a)] != 0; }
  std::size_t forbidden_count(Role role) const;
};

struct SupervisorState {
  explicit SupervisorState(std::size_t n_actions = 0) : values(n_actions) {}

  ValueTable values;
  std::vector<ExperienceReport> reports;  // this round only
};

struct SubordinateState {
  SubordinateState() = default;
  SubordinateState(std::size_t n_actions, const LearnerParams& params);

  ValueTable values;
  double exploration = 0.0;
  // Lifetime counters per pair: observations and hits of the running max.
  std::vector<std::uint64_t> count;
  std::vector<std::uint64_t> max_count;
};

// --- supervisor ---

void sup_update_q(SupervisorState& state, const ExperienceReport& report, const LearnerParams& params);

// r_max and freq from this round's reports only; pairs without reports
// fall back to FMQ = Q.
void sup_refresh_fmq(SupervisorState& state, const LearnerParams& params);

// Q-updates over the buffered reports in ascending agent order, then the FMQ
// refresh. Clears the buffer.
void sup_process_reports(SupervisorState& state, const LearnerParams& params);

double imitation_probability(double sharpness, double fmq_gap);

struct PeerView {
  const ValueTable* values = nullptr;
  double weight = 0.0;
};

// Picks one peer with probability proportional to weight and blends FMQ
// values into E. No peers: E = FMQ and no randomness is consumed.
void sup_imitate(SupervisorState& state, std::span<const PeerView> peers, const LearnerParams& params, Rng& rng);

// Normalizes each role's values to zero mean / unit population std and
// derives rules (normalized value below the threshold) and suggestions.
InstructionSet instructions_from_values(std::span<const double> values, std::size_t n_actions,
                                        const LearnerParams& params);

InstructionSet sup_generate_instructions(const SupervisorState& state, const LearnerParams& params);

// --- subordinate ---

void sub_update_q(SubordinateState& state, Role role, Action action, double reward, const LearnerParams& params);
void sub_refresh_fmq(SubordinateState& state, const LearnerParams& params);
void sub_apply_suggestions(SubordinateState& state, const InstructionSet& instr, const LearnerParams& params);
void sub_update_exploration(SubordinateState& state, const InstructionSet& instr, Role role, Action action,
                            const LearnerParams& params);

// Exact selection probabilities, averaging over greedy ties. Sums to 1.
std::vector<double> action_distribution(const SubordinateState& state, Role role, const InstructionSet& instr);

struct Selection {
  Action action = 0;
  bool rules_ignored = false;  // every action was forbidden
};

Selection sub_select_action(const SubordinateState& state, Role role, const InstructionSet& instr, Rng& rng);

}  // namespace normsim
