#include "normsim/games.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace normsim {

namespace {

constexpr double kProbabilityTolerance = 1e-9;

PayoffEntry fixed(double row, double col) { return PayoffEntry{{Outcome{row, col, 1.0}}}; }

// Two equiprobable outcomes with the payoffs swapped between the players.
PayoffEntry split(double first, double second) {
  return PayoffEntry{{Outcome{first, second, 0.5}, Outcome{second, first, 0.5}}};
}

// Norm layout shared by the high-penalty games: every third action
// (b, e, h, ...) is a suboptimal norm, the rest are optimal.
bool suboptimal_slot(Action a) { return a % 3 == 1; }

Game coordination(std::size_t n) {
  std::vector<PayoffEntry> entries;
  std::vector<JointAction> norms;
  for (Action r = 0; r < n; ++r) {
    for (Action c = 0; c < n; ++c) entries.push_back(r == c ? fixed(1, 1) : fixed(-1, -1));
    norms.push_back({r, r});
  }
  return Game("CG" + std::to_string(n), n, std::move(entries), std::move(norms), {});
}

Game anti_coordination(std::size_t n) {
  std::vector<PayoffEntry> entries;
  std::vector<JointAction> norms;
  for (Action r = 0; r < n; ++r) {
    for (Action c = 0; c < n; ++c) entries.push_back(r + c == n - 1 ? fixed(1, 1) : fixed(-1, -1));
    norms.push_back({r, n - 1 - r});
  }
  return Game("ACG" + std::to_string(n), n, std::move(entries), std::move(norms), {});
}

double high_penalty_value(Action r, Action c) {
  if (r == c) return suboptimal_slot(r) ? 7.0 : 10.0;
  if (suboptimal_slot(r) || suboptimal_slot(c)) return 0.0;
  return -30.0;
}

// Half-width of the stochastic split for each expected value.
double stochastic_spread(Action r, Action c) {
  if (r == c) return suboptimal_slot(r) ? 7.0 : 2.0;
  if (suboptimal_slot(r) || suboptimal_slot(c)) return 5.0;
  return 10.0;
}

Game high_penalty(std::size_t n, bool stochastic, std::string name) {
  std::vector<PayoffEntry> entries;
  std::vector<JointAction> optimal;
  std::vector<JointAction> suboptimal;
  for (Action r = 0; r < n; ++r) {
    for (Action c = 0; c < n; ++c) {
      const double v = high_penalty_value(r, c);
      if (stochastic) {
        const double spread = stochastic_spread(r, c);
        entries.push_back(split(v + spread, v - spread));
      } else {
        entries.push_back(fixed(v, v));
      }
    }
    (suboptimal_slot(r) ? suboptimal : optimal).push_back({r, r});
  }
  return Game(std::move(name), n, std::move(entries), std::move(optimal), std::move(suboptimal));
}

}  // namespace

std::string action_label(Action a) {
  return a < 26 ? std::string(1, static_cast<char>('a' + a)) : std::to_string(a);
}

std::string to_string(JointAction j) {
  std::string s = "(";
  s += action_label(j.row);
  s += ',';
  s += action_label(j.col);
  s += ')';
  return s;
}

std::pair<double, double> PayoffEntry::expected() const {
  double row = 0.0;
  double col = 0.0;
  for (const auto& o : outcomes) {
    row += o.probability * o.row;
    col += o.probability * o.col;
  }
  return {row, col};
}

std::string_view to_string(GameKind kind) {
  switch (kind) {
    case GameKind::CG: return "CG";
    case GameKind::ACG: return "ACG";
    case GameKind::CGHP: return "CGHP";
    case GameKind::FSCGHP: return "FSCGHP";
    case GameKind::CGHP3: return "CGHP3";
  }
  return "?";
}

GameKind parse_game_kind(std::string_view name) {
  for (auto k : {GameKind::CG, GameKind::ACG, GameKind::CGHP, GameKind::FSCGHP, GameKind::CGHP3}) {
    if (to_string(k) == name) return k;
  }
  throw GameError("unknown game kind '" + std::string(name) + "' (expected CG, ACG, CGHP, FSCGHP or CGHP3)");
}

Game::Game(std::string name, std::size_t n_actions, std::vector<PayoffEntry> entries,
           std::vector<JointAction> optimal_norms, std::vector<JointAction> suboptimal_norms)
    : name_(std::move(name)),
      n_actions_(n_actions),
      entries_(std::move(entries)),
      optimal_(std::move(optimal_norms)),
      suboptimal_(std::move(suboptimal_norms)) {
  if (n_actions_ == 0) throw GameError("game needs at least one action");
  if (entries_.size() != n_actions_ * n_actions_) {
    throw GameError("payoff matrix has " + std::to_string(entries_.size()) + " entries, expected " +
                    std::to_string(n_actions_ * n_actions_));
  }
  for (const auto& e : entries_) {
    if (e.outcomes.empty()) throw GameError("payoff entry without outcomes");
    double total = 0.0;
    for (const auto& o : e.outcomes) {
      if (!(o.probability >= 0.0 && o.probability <= 1.0)) throw GameError("outcome probability outside [0,1]");
      total += o.probability;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) throw GameError("outcome probabilities do not sum to 1");
    if (!e.deterministic()) stochastic_ = true;
  }
  auto check_norms = [&](const std::vector<JointAction>& norms) {
    for (auto j : norms) {
      if (j.row >= n_actions_ || j.col >= n_actions_) throw GameError("norm " + to_string(j) + " out of range");
    }
  };
  check_norms(optimal_);
  check_norms(suboptimal_);
  for (auto j : optimal_) {
    if (std::find(suboptimal_.begin(), suboptimal_.end(), j) != suboptimal_.end()) {
      throw GameError("norm " + to_string(j) + " is both optimal and suboptimal");
    }
  }
}

bool Game::is_optimal_norm(JointAction j) const {
  return std::find(optimal_.begin(), optimal_.end(), j) != optimal_.end();
}

bool Game::is_suboptimal_norm(JointAction j) const {
  return std::find(suboptimal_.begin(), suboptimal_.end(), j) != suboptimal_.end();
}

Game make_builtin(GameKind kind, std::size_t n_actions) {
  const std::string n_str = std::to_string(n_actions);
  switch (kind) {
    case GameKind::CG:
      if (n_actions < 2) throw GameError("CG needs at least 2 actions, got " + n_str);
      return coordination(n_actions);
    case GameKind::ACG:
      if (n_actions < 2) throw GameError("ACG needs at least 2 actions, got " + n_str);
      return anti_coordination(n_actions);
    case GameKind::CGHP:
      if (n_actions < 3) throw GameError("CGHP needs at least 3 actions, got " + n_str);
      return high_penalty(n_actions, false, "CGHP" + n_str);
    case GameKind::FSCGHP:
      if (n_actions < 3) throw GameError("FSCGHP needs at least 3 actions, got " + n_str);
      return high_penalty(n_actions, true, "FSCGHP" + n_str);
    case GameKind::CGHP3:
      if (n_actions != 3) throw GameError("CGHP3 is defined for exactly 3 actions, got " + n_str);
      return high_penalty(3, false, "CGHP3");
  }
  throw GameError("unsupported game kind");
}

std::pair<double, double> sample_payoff(const Game& game, Action row, Action col, Rng& rng) {
  const auto& e = game.entry(row, col);
  if (e.deterministic()) return {e.outcomes.front().row, e.outcomes.front().col};
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& o : e.outcomes) {
    acc += o.probability;
    if (u < acc) return {o.row, o.col};
  }
  return {e.outcomes.back().row, e.outcomes.back().col};
}

ExpectedMatrix expected_matrix(const Game& game) {
  ExpectedMatrix m;
  m.n = game.n_actions();
  m.cells.reserve(m.n * m.n);
  for (Action r = 0; r < m.n; ++r) {
    for (Action c = 0; c < m.n; ++c) m.cells.push_back(game.entry(r, c).expected());
  }
  return m;
}

bool is_pure_nash(const ExpectedMatrix& m, JointAction j) {
  const auto [row_pay, col_pay] = m.at(j.row, j.col);
  for (Action a = 0; a < m.n; ++a) {
    if (m.at(a, j.col).first > row_pay) return false;
    if (m.at(j.row, a).second > col_pay) return false;
  }
  return true;
}

Game parse_game(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw GameError(std::string("game file is not valid JSON: ") + e.what());
  }
  try {
    const auto n = doc.at("n_actions").get<std::size_t>();
    const auto& rows = doc.at("entries");
    if (!rows.is_array() || rows.size() != n) throw GameError("game file: 'entries' must have n_actions rows");
    std::vector<PayoffEntry> entries;
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != n) throw GameError("game file: incomplete payoff matrix row");
      for (const auto& cell : row) {
        PayoffEntry e;
        for (const auto& o : cell) {
          if (o.size() != 3) throw GameError("game file: outcome must be [row, col, probability]");
          e.outcomes.push_back({o[0].get<double>(), o[1].get<double>(), o[2].get<double>()});
        }
        entries.push_back(std::move(e));
      }
    }
    auto norms = [&](const char* key) {
      std::vector<JointAction> out;
      if (!doc.contains(key)) return out;
      for (const auto& p : doc.at(key)) out.push_back({p.at(0).get<Action>(), p.at(1).get<Action>()});
      return out;
    };
    return Game(doc.value("name", std::string("custom")), n, std::move(entries), norms("optimal_norms"),
                norms("suboptimal_norms"));
  } catch (const json::exception& e) {
    throw GameError(std::string("game file: ") + e.what());
  }
}

Game load_game(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GameError("cannot open game file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_game(buf.str());
}

std::string game_to_json(const Game& game) {
  using nlohmann::json;
  json doc;
  doc["name"] = game.name();
  doc["n_actions"] = game.n_actions();
  json rows = json::array();
  for (Action r = 0; r < game.n_actions(); ++r) {
    json row = json::array();
    for (Action c = 0; c < game.n_actions(); ++c) {
      json cell = json::array();
      for (const auto& o : game.entry(r, c).outcomes) cell.push_back({o.row, o.col, o.probability});
      row.push_back(cell);
    }
    rows.push_back(row);
  }
  doc["entries"] = rows;
  auto norms = [](const std::vector<JointAction>& v) {
    json out = json::array();
    for (auto j : v) out.push_back({j.row, j.col});
    return out;
  };
  doc["optimal_norms"] = norms(game.optimal_norms());
  doc["suboptimal_norms"] = norms(game.suboptimal_norms());
  return doc.dump(1);
}

}  // namespace normsim
