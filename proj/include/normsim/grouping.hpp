#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "normsim/rng.hpp"
#include "normsim/topology.hpp"

namespace normsim {

using GroupId = std::size_t;

class GroupingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Adjacency between two supervisors, weighted by how strongly their
// subordinate groups are wired together.
struct GroupLink {
  GroupId group = 0;
  std::size_t cross_edges = 0;
  double degree = 0.0;  // cross_edges / all cross edges of the owning group
};

// Partition of the agents into supervised clusters. Each supervisor is a
// member of the group it supervises.
struct Grouping {
  std::vector<std::vector<NodeId>> groups;
  std::vector<NodeId> supervisor_of_group;
  std::vector<GroupId> group_of_node;
  std::vector<std::vector<GroupLink>> links;
  std::vector<std::string> warnings;

  std::size_t num_groups() const { return groups.size(); }
  bool is_supervisor(NodeId v) const { return supervisor_of_group[group_of_node[v]] == v; }
};

enum class GroupingKind { Random, Degree, KMeans, KernighanLin };

std::string_view to_string(GroupingKind kind);
GroupingKind parse_grouping_kind(std::string_view name);

std::optional<std::string> validate(const Graph& graph, const Grouping& grouping);

Grouping group_random(const Graph& graph, std::size_t k, std::uint64_t seed);
Grouping group_degree(const Graph& graph, std::uint64_t seed);

struct KMeansOptions {
  std::optional<std::size_t> dist_max;  // default: ceil(diameter / 2)
  std::optional<std::size_t> size_max;  // default: 2 * ceil(n / k)
  std::size_t max_iterations = 100;
};

Grouping group_kmeans(const Graph& graph, std::size_t k, const KMeansOptions& options, std::uint64_t seed);

// MinCut is classic Kernighan-Lin. MaximizeExternal accepts swaps that
// lower the internal and raise the external cost, i.e. it pushes the cut up.
enum class KlObjective { MinCut, MaximizeExternal };

struct KlBisection {
  std::vector<NodeId> left;
  std::vector<NodeId> right;
  std::vector<std::size_t> cut_history;  // cut size after the initial split and after each accepted pass
};

// One balanced Kernighan-Lin bisection of `nodes` in the induced subgraph.
KlBisection kernighan_lin_bisect(const Graph& graph, std::vector<NodeId> nodes, KlObjective objective, Rng& rng);

Grouping group_kernighan_lin(const Graph& graph, std::size_t k, std::uint64_t seed,
                             KlObjective objective = KlObjective::MinCut);

// Fills `links` from cross-group edge counts.
void neighboring_degrees(const Graph& graph, Grouping& grouping);

// Assembles a grouping from a group-id-per-node assignment and the chosen
// supervisors, then derives links.
Grouping make_grouping(const Graph& graph, const std::vector<GroupId>& group_of_node,
                       const std::vector<NodeId>& supervisors);

std::size_t cut_size(const Graph& graph, const std::vector<GroupId>& group_of_node);

// Debug dump: "node group" lines followed by "supervisor group node" lines.
void write_grouping(const Grouping& grouping, std::ostream& out);

}  // namespace normsim
