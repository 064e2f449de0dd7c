#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "normsim/games.hpp"

namespace normsim {

struct RunSummary {
  std::uint64_t seed = 0;
  std::optional<std::size_t> converged_round;
  std::optional<JointAction> norm;        // norm of the first convergence window
  std::optional<JointAction> final_norm;  // norm holding over the last window, if any
  double final_payoff = 0.0;              // mean payoff over the last window
  std::vector<double> payoff_series;      // one entry per round
  // Late intervention: round the fixed agents were inserted, and the first
  // convergence window that starts after it.
  std::optional<std::size_t> intervention_round;
  std::optional<Action> intervention_action;
  std::optional<std::size_t> reconverged_round;
  std::optional<JointAction> reconverged_norm;
  // Per sub-population final norms (isolation runs only).
  std::vector<std::optional<JointAction>> population_norms;
  // Fraction of learners whose greedy Row/Column actions match `final_norm`.
  double policy_match = 0.0;
};

// Streaming mean/variance (Welford) with Chan's parallel merge.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);

  std::size_t count() const { return n_; }
  double mean() const { return n_ == 0 ? 0.0 : mean_; }
  // Population variance.
  double variance() const { return n_ == 0 ? 0.0 : m2_ / static_cast<double>(n_); }
  double stddev() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

class MetricsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Aggregate {
  std::size_t n_runs = 0;
  std::size_t n_converged = 0;
  double convergence_fraction = 0.0;
  double mean_converged_round = 0.0;  // over converged runs only
  double std_converged_round = 0.0;
  double mean_final_payoff = 0.0;
  std::map<JointAction, double> norm_frequencies;  // over converged runs
  std::vector<double> mean_payoff;                 // per round
  std::vector<double> std_payoff;                  // per round, population std
};

Aggregate aggregate(const std::vector<RunSummary>& runs);

struct ComparisonRow {
  std::string name;
  std::size_t rank = 0;  // 1-based; equal keys share a rank
  double mean_converged_round = 0.0;
  double convergence_fraction = 0.0;
  double mean_final_payoff = 0.0;
};

// Ranks configurations by mean converged round (unconverged sorts last).
std::vector<ComparisonRow> compare(const std::vector<std::pair<std::string, Aggregate>>& aggregates);

// CSV column orders:
//   rounds:     round,mean_payoff,std_payoff
//   runs:       seed,converged_round,norm,final_norm,final_payoff
//   comparison: rank,name,mean_converged_round,convergence_fraction,mean_final_payoff
void write_rounds_csv(const Aggregate& agg, std::ostream& out);
void write_runs_csv(const std::vector<RunSummary>& runs, std::ostream& out);
void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);
std::string aggregate_to_json(const Aggregate& agg);

std::string format_number(double x);

}  // namespace normsim
