#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "normsim/rng.hpp"

namespace normsim {

using Action = std::size_t;

// The learner state space: which side of the stage game an agent plays.
enum class Role : std::uint8_t { Row = 0, Column = 1 };
inline constexpr std::size_t kNumRoles = 2;

inline constexpr std::size_t role_index(Role r) { return static_cast<std::size_t>(r); }
inline constexpr Role other_role(Role r) { return r == Role::Row ? Role::Column : Role::Row; }

struct JointAction {
  Action row = 0;
  Action col = 0;
  auto operator<=>(const JointAction&) const = default;
};

// 'a', 'b', ... for the first 26 actions, decimal index beyond.
std::string action_label(Action a);
std::string to_string(JointAction j);

struct Outcome {
  double row = 0.0;
  double col = 0.0;
  double probability = 1.0;
};

struct PayoffEntry {
  std::vector<Outcome> outcomes;

  bool deterministic() const { return outcomes.size() == 1; }
  std::pair<double, double> expected() const;
};

enum class GameKind { CG, ACG, CGHP, FSCGHP, CGHP3 };

std::string_view to_string(GameKind kind);
GameKind parse_game_kind(std::string_view name);

class GameError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Two-player normal-form stage game. Immutable once built.
class Game {
 public:
  Game(std::string name, std::size_t n_actions, std::vector<PayoffEntry> entries,
       std::vector<JointAction> optimal_norms, std::vector<JointAction> suboptimal_norms);

  const std::string& name() const { return name_; }
  std::size_t n_actions() const { return n_actions_; }
  const PayoffEntry& entry(Action row, Action col) const { return entries_[row * n_actions_ + col]; }
  const std::vector<JointAction>& optimal_norms() const { return optimal_; }
  const std::vector<JointAction>& suboptimal_norms() const { return suboptimal_; }
  bool is_optimal_norm(JointAction j) const;
  bool is_suboptimal_norm(JointAction j) const;
  bool stochastic() const { return stochastic_; }

 private:
  std::string name_;
  std::size_t n_actions_;
  std::vector<PayoffEntry> entries_;
  std::vector<JointAction> optimal_;
  std::vector<JointAction> suboptimal_;
  bool stochastic_ = false;
};

Game make_builtin(GameKind kind, std::size_t n_actions);

// Draws the realized payoff pair. Deterministic entries consume no
// randomness; stochastic entries consume exactly one uniform draw.
std::pair<double, double> sample_payoff(const Game& game, Action row, Action col, Rng& rng);

struct ExpectedMatrix {
  std::size_t n = 0;
  std::vector<std::pair<double, double>> cells;

  const std::pair<double, double>& at(Action row, Action col) const { return cells[row * n + col]; }
};

ExpectedMatrix expected_matrix(const Game& game);

// True when neither player gains by a unilateral deviation from `j`.
bool is_pure_nash(const ExpectedMatrix& m, JointAction j);

// JSON game documents:
//   {"name": "...", "n_actions": 2,
//    "entries": [[[[1,1,1.0]], [[-1,-1,1.0]]], ...],   // row-major, outcome = [row, col, p]
//    "optimal_norms": [[0,0],[1,1]], "suboptimal_norms": []}
Game parse_game(std::string_view json_text);
Game load_game(const std::filesystem::path& path);
std::string game_to_json(const Game& game);

}  // namespace normsim
