#include <doctest.h>

#include <cmath>
#include <vector>

#include "normsim/learners.hpp"
#include "normsim/rng.hpp"

using namespace normsim;

TEST_CASE("two-step supervisor Q") {
  LearnerParams p;
  SupervisorState s(2);
  sup_update_q(s, {0, Role::Row, 0, 10.0}, p);
  CHECK(s.values.q[0] == doctest::Approx(9.9).epsilon(1e-12));
  sup_update_q(s, {0, Role::Row, 0, -30.0}, p);
  // 0.01 * 9.9 + 0.99 * -30
  CHECK(s.values.q[0] == doctest::Approx(0.099 - 29.7).epsilon(1e-12));
  CHECK(s.values.q[0] == doctest::Approx(-29.601).epsilon(1e-12));
}

TEST_CASE("supervisor reports are processed in agent order and the buffer cleared") {
  LearnerParams p;
  SupervisorState a(2), b(2);
  a.reports = {{3, Role::Row, 0, 10.0}, {1, Role::Row, 0, -30.0}};
  b.reports = {{1, Role::Row, 0, -30.0}, {3, Role::Row, 0, 10.0}};
  sup_process_reports(a, p);
  sup_process_reports(b, p);
  CHECK(a.values.q == b.values.q);
  CHECK(a.values.q[0] == doctest::Approx(0.01 * (0.99 * -30.0) + 0.99 * 10.0));
  CHECK(a.reports.empty());
}

TEST_CASE("supervisor r_max and freq come from this round only") {
  LearnerParams p;
  SupervisorState s(2);
  s.reports = {{0, Role::Row, 0, 10.0}};
  sup_process_reports(s, p);
  s.reports = {{0, Role::Row, 0, -30.0}};
  sup_process_reports(s, p);
  CHECK(s.values.r_max[0] == -30.0);
  CHECK(s.values.freq[0] == 1.0);

  // Subordinate with the same history keeps lifetime counts.
  SubordinateState sub(2, p);
  sub_update_q(sub, Role::Row, 0, 10.0, p);
  sub_update_q(sub, Role::Row, 0, -30.0, p);
  CHECK(sub.values.r_max[0] == 10.0);
  CHECK(sub.values.freq[0] == 0.5);
}

TEST_CASE("rules single out a large penalty") {
  LearnerParams p;
  const std::vector<double> e = {10, 10, 10, 10, 10, -50, 0, 0, 0, 0, 0, 0};
  const auto ins = instructions_from_values(e, 6, p);
  // mean 0, sigma sqrt((5*100 + 2500)/6) = sqrt(500)
  const double sigma = std::sqrt(500.0);
  CHECK(ins.degree(Role::Row, 5) == doctest::Approx(-50.0 / sigma));
  CHECK(ins.degree(Role::Row, 5) == doctest::Approx(-2.236).epsilon(1e-3));
  for (Action a = 0; a < 5; ++a) {
    CHECK(ins.degree(Role::Row, a) == doctest::Approx(10.0 / sigma));
    CHECK_FALSE(ins.is_forbidden(Role::Row, a));
  }
  CHECK(ins.is_forbidden(Role::Row, 5));
  CHECK(ins.forbidden_count(Role::Column) == 0);
}

TEST_CASE("normalized values have zero mean and unit std; shifting E changes nothing") {
  LearnerParams p;
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(8);
    std::vector<double> e(2 * n);
    for (auto& x : e) x = rng.uniform() * 100.0 - 50.0;
    const auto ins = instructions_from_values(e, n, p);
    for (std::size_t s = 0; s < 2; ++s) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t a = 0; a < n; ++a) mean += ins.suggestion[s * n + a];
      mean /= static_cast<double>(n);
      for (std::size_t a = 0; a < n; ++a) sq += std::pow(ins.suggestion[s * n + a] - mean, 2);
      CHECK(std::abs(mean) <= 1e-9);
      CHECK(std::abs(std::sqrt(sq / static_cast<double>(n)) - 1.0) <= 1e-9);
    }
    auto shifted = e;
    for (auto& x : shifted) x += 1234.5;
    const auto moved = instructions_from_values(shifted, n, p);
    CHECK(moved.forbidden == ins.forbidden);
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(moved.suggestion[i] == doctest::Approx(ins.suggestion[i]));
  }
}

TEST_CASE("imitation probability is monotone with p(0) = 1/2") {
  CHECK(imitation_probability(0.1, 0.0) == 0.5);
  double prev = 0.0;
  for (double x = -100.0; x <= 100.0; x += 0.5) {
    const double p = imitation_probability(0.1, x);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("imitation picks peers in proportion to weight") {
  LearnerParams p;
  p.imitation_sharpness = 1e6;  // copy the chosen peer outright
  SupervisorState a(1), b(1);
  a.values.fmq.assign(2, 1.0);
  b.values.fmq.assign(2, 2.0);
  const PeerView peers[] = {{&a.values, 0.75}, {&b.values, 0.25}};
  Rng rng(11);
  int picked_a = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    SupervisorState s(1);
    s.values.fmq.assign(2, 0.0);
    sup_imitate(s, peers, p, rng);
    picked_a += s.values.e[0] == doctest::Approx(1.0) ? 1 : 0;
  }
  CHECK(std::abs(static_cast<double>(picked_a) / n - 0.75) < 0.02);
}

TEST_CASE("no peers leaves E = FMQ without consuming randomness") {
  LearnerParams p;
  SupervisorState s(2);
  s.values.fmq = {1, 2, 3, 4};
  Rng a(5), b(5);
  sup_imitate(s, {}, p, a);
  CHECK(s.values.e == s.values.fmq);
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("new lifetime maximum restarts the hit count") {
  LearnerParams p;
  SubordinateState s(2, p);
  for (double r : {7.0, 7.0, 0.0}) sub_update_q(s, Role::Column, 1, r, p);
  const auto i = s.values.index(Role::Column, 1);
  CHECK(s.values.freq[i] == doctest::Approx(2.0 / 3.0));
  sub_update_q(s, Role::Column, 1, 10.0, p);
  CHECK(s.values.r_max[i] == 10.0);
  CHECK(s.values.freq[i] == doctest::Approx(1.0 / 4.0));
}

TEST_CASE("positive suggestion on a negative value makes it more negative") {
  LearnerParams p;
  SubordinateState s(1, p);
  s.values.fmq = {-10.0, 0.0};
  auto ins = InstructionSet::neutral(1);
  ins.suggestion[0] = 1.0;
  sub_apply_suggestions(s, ins, p);
  CHECK(s.values.e[0] == doctest::Approx(-10.1));
}

TEST_CASE("exploration clamps at both ends") {
  LearnerParams p;
  SubordinateState s(2, p);
  auto ins = InstructionSet::neutral(2);
  ins.suggestion[0] = -2.0;
  sub_update_exploration(s, ins, Role::Row, 0, p);
  CHECK(s.exploration == doctest::Approx(0.99));

  s.exploration = 0.0105;
  ins.suggestion[0] = 10.0;
  sub_update_exploration(s, ins, Role::Row, 0, p);
  CHECK(s.exploration == doctest::Approx(0.01));
}

TEST_CASE("greedy is certain when every alternative is forbidden") {
  LearnerParams p;
  SubordinateState s(3, p);
  s.exploration = 0.9;
  s.values.e[0] = 1.0;
  auto ins = InstructionSet::neutral(3);
  ins.forbidden[1] = ins.forbidden[2] = 1;
  const auto d = action_distribution(s, Role::Row, ins);
  CHECK(d == std::vector<double>{1.0, 0.0, 0.0});
  Rng rng(2);
  for (int i = 0; i < 100; ++i) CHECK(sub_select_action(s, Role::Row, ins, rng).action == 0);
}

TEST_CASE("all actions forbidden fails open") {
  LearnerParams p;
  SubordinateState s(3, p);
  s.exploration = 0.3;
  s.values.e[2] = 5.0;
  auto ins = InstructionSet::neutral(3);
  std::fill(ins.forbidden.begin(), ins.forbidden.begin() + 3, 1);
  const auto d = action_distribution(s, Role::Row, ins);
  CHECK(d[2] == doctest::Approx(0.7));
  CHECK(d[0] == doctest::Approx(0.15));
  Rng rng(4);
  CHECK(sub_select_action(s, Role::Row, ins, rng).rules_ignored);
}

TEST_CASE("action distribution sums to one and matches sampling") {
  LearnerParams p;
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(6);
    SubordinateState s(n, p);
    s.exploration = rng.uniform();
    for (auto& e : s.values.e) e = static_cast<double>(rng.index(3));  // ties are common
    auto ins = InstructionSet::neutral(n);
    for (auto& f : ins.forbidden) f = rng.bernoulli(0.3) ? 1 : 0;
    const auto d = action_distribution(s, Role::Column, ins);
    double sum = 0.0;
    for (double x : d) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  SubordinateState s(6, p);
  s.exploration = 0.45;
  s.values.e = {0, 1, 3, 3, 2, 0, 0, 0, 0, 0, 0, 0};
  auto ins = InstructionSet::neutral(6);
  ins.forbidden[0] = ins.forbidden[4] = 1;
  const auto d = action_distribution(s, Role::Row, ins);
  std::vector<int> hits(6, 0);
  const int n = 1000000;
  for (int i = 0; i < n; ++i) ++hits[sub_select_action(s, Role::Row, ins, rng).action];
  CHECK(hits[0] == 0);
  CHECK(hits[4] == 0);
  for (Action a = 0; a < 6; ++a) {
    // Five binomial standard deviations.
    const double sd = std::sqrt(d[a] * (1 - d[a]) / n);
    CHECK(std::abs(static_cast<double>(hits[a]) / n - d[a]) <= 5 * sd + 1e-12);
  }
}

TEST_CASE("with C = rho = gamma = 0 and no rules a subordinate is plain epsilon-greedy Q-learning") {
  LearnerParams p;
  p.fmq_weight = 0.0;
  p.suggestion_weight = 0.0;
  p.exploration_weight = 0.0;
  SubordinateState s(3, p);
  auto ins = InstructionSet::neutral(3);
  ins.suggestion = {2.0, -1.0, 0.5, 0.3, 0.3, -3.0};
  Rng rng(6);
  std::vector<double> q(6, 0.0);
  for (int t = 0; t < 300; ++t) {
    const Action a = sub_select_action(s, Role::Row, ins, rng).action;
    const double r = a == 1 ? 1.0 : -1.0;
    sub_update_q(s, Role::Row, a, r, p);
    q[a] = 0.01 * q[a] + 0.99 * r;
    sub_refresh_fmq(s, p);
    sub_apply_suggestions(s, ins, p);
    sub_update_exploration(s, ins, Role::Row, a, p);
    CHECK(s.values.q == q);
    CHECK(s.values.e == q);
    CHECK(s.exploration == p.initial_exploration);
  }
}

TEST_CASE("learner parameter validation") {
  LearnerParams p;
  CHECK_NOTHROW(p.validate());
  p.learning_rate = 0.0;
  CHECK_THROWS(p.validate());
  p = {};
  p.min_exploration = 0.5;
  p.max_exploration = 0.4;
  CHECK_THROWS(p.validate());
}
