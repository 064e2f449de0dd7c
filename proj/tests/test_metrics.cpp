#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "normsim/metrics.hpp"
#include "normsim/rng.hpp"

using namespace normsim;

namespace {

RunSummary summary(std::optional<std::size_t> round, std::optional<JointAction> norm, double payoff,
                   std::vector<double> series) {
  RunSummary s;
  s.seed = 42;
  s.converged_round = round;
  s.norm = norm;
  s.final_norm = norm;
  s.final_payoff = payoff;
  s.payoff_series = std::move(series);
  return s;
}

}  // namespace

TEST_CASE("Welford agrees with the two-pass formula, also when merged") {
  Rng rng(1);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = 1e6 + rng.uniform() * 10.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());

  RunningStats all, left, right;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    all.add(xs[i]);
    (i < 377 ? left : right).add(xs[i]);
  }
  left.merge(right);
  CHECK(all.mean() == doctest::Approx(mean).epsilon(1e-12));
  CHECK(all.variance() == doctest::Approx(var).epsilon(1e-9));
  CHECK(left.count() == all.count());
  CHECK(left.mean() == doctest::Approx(mean).epsilon(1e-12));
  CHECK(left.variance() == doctest::Approx(var).epsilon(1e-9));
}

TEST_CASE("empty stats are zero") {
  RunningStats s;
  CHECK(s.count() == 0);
  CHECK(s.mean() == 0.0);
  CHECK(s.stddev() == 0.0);
}

TEST_CASE("aggregate counts converged runs only for rounds and norms") {
  const auto a = aggregate({summary(10, JointAction{0, 0}, 1.0, {0, 1}), summary(20, JointAction{0, 0}, 1.0, {1, 1}),
                            summary(std::nullopt, std::nullopt, -1.0, {0, 0})});
  CHECK(a.n_runs == 3);
  CHECK(a.n_converged == 2);
  CHECK(a.convergence_fraction == doctest::Approx(2.0 / 3.0));
  CHECK(a.mean_converged_round == doctest::Approx(15.0));
  CHECK(a.std_converged_round == doctest::Approx(5.0));
  CHECK(a.mean_final_payoff == doctest::Approx(1.0 / 3.0));
  CHECK(a.norm_frequencies.at({0, 0}) == doctest::Approx(1.0));
  CHECK(a.mean_payoff[0] == doctest::Approx(1.0 / 3.0));
  CHECK(a.mean_payoff[1] == doctest::Approx(2.0 / 3.0));
  CHECK(a.std_payoff[0] == doctest::Approx(std::sqrt(2.0 / 9.0)));
}

TEST_CASE("aggregate rejects empty and ragged input") {
  CHECK_THROWS_AS(aggregate({}), MetricsError);
  CHECK_THROWS_AS(aggregate({summary(1, JointAction{0, 0}, 1, {1}), summary(1, JointAction{0, 0}, 1, {1, 1})}),
                  MetricsError);
}

TEST_CASE("compare ranks faster first and unconverged last") {
  Aggregate fast, slow, never;
  fast.convergence_fraction = slow.convergence_fraction = 1.0;
  fast.mean_converged_round = 50;
  slow.mean_converged_round = 80;
  never.convergence_fraction = 0.0;
  const auto rows = compare({{"never", never}, {"slow", slow}, {"fast", fast}});
  CHECK(rows[0].name == "fast");
  CHECK(rows[0].rank == 1);
  CHECK(rows[1].name == "slow");
  CHECK(rows[1].rank == 2);
  CHECK(rows[2].name == "never");
  CHECK(rows[2].rank == 3);
}

TEST_CASE("CSV layouts") {
  const std::vector<RunSummary> runs = {summary(3, JointAction{1, 1}, 0.5, {0.25, 0.5}),
                                        summary(std::nullopt, std::nullopt, -1, {0, 0})};
  std::ostringstream r;
  write_runs_csv(runs, r);
  CHECK(r.str() == "seed,converged_round,norm,final_norm,final_payoff\n"
                   "42,3,\"(b,b)\",\"(b,b)\",0.5\n"
                   "42,,\"\",\"\",-1\n");

  std::ostringstream t;
  write_rounds_csv(aggregate(runs), t);
  CHECK(t.str() == "round,mean_payoff,std_payoff\n0,0.125,0.125\n1,0.25,0.25\n");

  std::ostringstream c;
  write_comparison_csv({{"x", 1, 12.5, 1.0, 0.75}}, c);
  CHECK(c.str() == "rank,name,mean_converged_round,convergence_fraction,mean_final_payoff\n1,x,12.5,1,0.75\n");
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("aggregate JSON") {
  const auto j = nlohmann::json::parse(aggregate_to_json(
      aggregate({summary(3, JointAction{0, 0}, 1, {1}), summary(5, JointAction{1, 1}, 1, {1})})));
  CHECK(j["n_runs"] == 2);
  CHECK(j["mean_converged_round"] == 4.0);
  CHECK(j["norm_frequencies"]["(a,a)"] == 0.5);
  CHECK(j["norm_frequencies"]["(b,b)"] == 0.5);
}
