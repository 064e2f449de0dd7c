#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace normsim {

using NodeId = std::size_t;

class TopologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Simple undirected graph: no self-loops, no parallel edges. Neighbor lists
// are kept sorted so iteration order is independent of insertion order.
class Graph {
 public:
  explicit Graph(std::size_t n = 0) : adjacency_(n) {}

  std::size_t num_nodes() const { return adjacency_.size(); }
  std::size_t num_edges() const { return edges_; }

  // Returns false when the edge already exists.
  bool add_edge(NodeId u, NodeId v);
  bool remove_edge(NodeId u, NodeId v);
  bool has_edge(NodeId u, NodeId v) const;

  std::span<const NodeId> neighbors(NodeId u) const { return adjacency_[u]; }
  std::size_t degree(NodeId u) const { return adjacency_[u].size(); }
  double mean_degree() const;

  // Edges as (u, v) with u < v, sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  bool operator==(const Graph&) const = default;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edges_ = 0;
};

enum class TopologyKind { Grid, Ring, Random, SmallWorld, ScaleFree };

std::string_view to_string(TopologyKind kind);
TopologyKind parse_topology_kind(std::string_view name);

struct TopologyParams {
  // Target mean degree. Unset means the per-kind default: 2 for a ring,
  // 4 for the grid (fixed by the lattice), 6 otherwise.
  std::optional<double> mean_degree;
  double rewire_probability = 0.1;
  // G(n, p) edge probability; unset derives it from the mean degree.
  std::optional<double> edge_probability;
};

Graph generate(TopologyKind kind, std::size_t n, const TopologyParams& params, std::uint64_t seed);

Graph make_complete(std::size_t n);
Graph make_star(std::size_t leaves);
Graph make_path(std::size_t n);
Graph make_ring_lattice(std::size_t n, std::size_t degree);

bool is_connected(const Graph& g);
std::vector<std::vector<NodeId>> connected_components(const Graph& g);

// Hop distance, or nullopt when v is unreachable from u.
std::optional<std::size_t> shortest_path_distance(const Graph& g, NodeId u, NodeId v);

inline constexpr std::size_t kUnreachable = static_cast<std::size_t>(-1);

// BFS hop counts from `source`; unreachable nodes hold kUnreachable.
std::vector<std::size_t> bfs_distances(const Graph& g, NodeId source);

// Row-major n x n hop-distance matrix.
std::vector<std::size_t> all_pairs_distances(const Graph& g);

// Largest finite pairwise distance.
std::size_t diameter(const Graph& g);

enum class CentralityMetric { Degree, Betweenness, Closeness, Eigenvector };

std::string_view to_string(CentralityMetric metric);
CentralityMetric parse_centrality_metric(std::string_view name);

struct CentralityScores {
  CentralityMetric metric;
  std::vector<double> scores;
};

// DC: neighbor count. BC: Brandes shortest-path betweenness, each unordered
// pair counted once. CC: (n-1) / sum of distances. EC: principal adjacency
// eigenvector scaled to unit max entry. CC and EC require a connected graph.
CentralityScores centrality(const Graph& g, CentralityMetric metric);

// Reference betweenness by explicit enumeration of all shortest paths. Only
// usable on small graphs; kept for cross-checking.
std::vector<double> betweenness_by_enumeration(const Graph& g);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

// Edge-list text: first non-comment line holds n, then one "u v" per line.
void write_edge_list(const Graph& g, std::ostream& out);
Graph read_edge_list(std::istream& in);
void save_edge_list(const Graph& g, const std::filesystem::path& path);
Graph load_edge_list(const std::filesystem::path& path);

}  // namespace normsim
