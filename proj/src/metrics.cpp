#include "normsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

namespace normsim {

void RunningStats::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double d = other.mean_ - mean_;
  const double n = na + nb;
  mean_ += d * nb / n;
  m2_ += other.m2_ + d * d * na * nb / n;
  n_ += other.n_;
}

double RunningStats::stddev() const { return std::sqrt(std::max(0.0, variance())); }

Aggregate aggregate(const std::vector<RunSummary>& runs) {
  if (runs.empty()) throw MetricsError("cannot aggregate zero runs");
  const std::size_t rounds = runs.front().payoff_series.size();
  for (const auto& r : runs) {
    if (r.payoff_series.size() != rounds) throw MetricsError("runs have different payoff series lengths");
  }
  Aggregate agg;
  agg.n_runs = runs.size();
  RunningStats conv;
  RunningStats final_payoff;
  for (const auto& r : runs) {
    final_payoff.add(r.final_payoff);
    if (!r.converged_round) continue;
    conv.add(static_cast<double>(*r.converged_round));
    if (r.norm) agg.norm_frequencies[*r.norm] += 1.0;
  }
  agg.n_converged = conv.count();
  agg.convergence_fraction = static_cast<double>(agg.n_converged) / static_cast<double>(agg.n_runs);
  agg.mean_converged_round = conv.mean();
  agg.std_converged_round = conv.stddev();
  agg.mean_final_payoff = final_payoff.mean();
  for (auto& [norm, f] : agg.norm_frequencies) f /= static_cast<double>(agg.n_converged);

  agg.mean_payoff.resize(rounds);
  agg.std_payoff.resize(rounds);
  for (std::size_t t = 0; t < rounds; ++t) {
    RunningStats s;
    for (const auto& r : runs) s.add(r.payoff_series[t]);
    agg.mean_payoff[t] = s.mean();
    agg.std_payoff[t] = s.stddev();
  }
  return agg;
}

std::vector<ComparisonRow> compare(const std::vector<std::pair<std::string, Aggregate>>& aggregates) {
  if (aggregates.empty()) throw MetricsError("nothing to compare");
  std::vector<ComparisonRow> rows;
  for (const auto& [name, agg] : aggregates) {
    rows.push_back({name, 0, agg.mean_converged_round, agg.convergence_fraction, agg.mean_final_payoff});
  }
  auto key = [](const ComparisonRow& r) {
    return r.convergence_fraction > 0.0 ? r.mean_converged_round : std::numeric_limits<double>::infinity();
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].rank = (i > 0 && key(rows[i]) == key(rows[i - 1])) ? rows[i - 1].rank : i + 1;
  }
  return rows;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

namespace {

std::string norm_cell(const std::optional<JointAction>& j) { return j ? to_string(*j) : ""; }

}  // namespace

void write_rounds_csv(const Aggregate& agg, std::ostream& out) {
  out << "round,mean_payoff,std_payoff\n";
  for (std::size_t t = 0; t < agg.mean_payoff.size(); ++t) {
    out << t << ',' << format_number(agg.mean_payoff[t]) << ',' << format_number(agg.std_payoff[t]) << '\n';
  }
}

void write_runs_csv(const std::vector<RunSummary>& runs, std::ostream& out) {
  out << "seed,converged_round,norm,final_norm,final_payoff\n";
  for (const auto& r : runs) {
    out << r.seed << ',' << (r.converged_round ? std::to_string(*r.converged_round) : "") << ",\""
        << norm_cell(r.norm) << "\",\"" << norm_cell(r.final_norm) << "\"," << format_number(r.final_payoff) << '\n';
  }
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  out << "rank,name,mean_converged_round,convergence_fraction,mean_final_payoff\n";
  for (const auto& r : rows) {
    out << r.rank << ',' << r.name << ',' << format_number(r.mean_converged_round) << ','
        << format_number(r.convergence_fraction) << ',' << format_number(r.mean_final_payoff) << '\n';
  }
}

std::string aggregate_to_json(const Aggregate& agg) {
  nlohmann::ordered_json j;
  j["n_runs"] = agg.n_runs;
  j["n_converged"] = agg.n_converged;
  j["convergence_fraction"] = agg.convergence_fraction;
  j["mean_converged_round"] = agg.mean_converged_round;
  j["std_converged_round"] = agg.std_converged_round;
  j["mean_final_payoff"] = agg.mean_final_payoff;
  auto& norms = j["norm_frequencies"] = nlohmann::ordered_json::object();
  for (const auto& [norm, f] : agg.norm_frequencies) norms[to_string(norm)] = f;
  return j.dump(2);
}

}  // namespace normsim
