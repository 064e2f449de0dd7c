#include "normsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "normsim/rng.hpp"

namespace normsim {

bool Graph::add_edge(NodeId u, NodeId v) {
  if (u >= num_nodes() || v >= num_nodes()) throw TopologyError("edge endpoint out of range");
  if (u == v) throw TopologyError("self-loop on node " + std::to_string(u));
  auto& nu = adjacency_[u];
  auto it = std::lower_bound(nu.begin(), nu.end(), v);
  if (it != nu.end() && *it == v) return false;
  nu.insert(it, v);
  auto& nv = adjacency_[v];
  nv.insert(std::lower_bound(nv.begin(), nv.end(), u), u);
  ++edges_;
  return true;
}

bool Graph::remove_edge(NodeId u, NodeId v) {
  if (!has_edge(u, v)) return false;
  auto& nu = adjacency_[u];
  nu.erase(std::lower_bound(nu.begin(), nu.end(), v));
  auto& nv = adjacency_[v];
  nv.erase(std::lower_bound(nv.begin(), nv.end(), u));
  --edges_;
  return true;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= num_nodes() || v >= num_nodes()) return false;
  return std::binary_search(adjacency_[u].begin(), adjacency_[u].end(), v);
}

double Graph::mean_degree() const {
  return num_nodes() == 0 ? 0.0 : 2.0 * static_cast<double>(edges_) / static_cast<double>(num_nodes());
}

std::vector<std::pair<NodeId, NodeId>> Graph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edges_);
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Grid: return "grid";
    case TopologyKind::Ring: return "ring";
    case TopologyKind::Random: return "random";
    case TopologyKind::SmallWorld: return "small_world";
    case TopologyKind::ScaleFree: return "scale_free";
  }
  return "?";
}

TopologyKind parse_topology_kind(std::string_view name) {
  for (auto k : {TopologyKind::Grid, TopologyKind::Ring, TopologyKind::Random, TopologyKind::SmallWorld,
                 TopologyKind::ScaleFree}) {
    if (to_string(k) == name) return k;
  }
  throw TopologyError("unknown topology '" + std::string(name) +
                      "' (expected grid, ring, random, small_world or scale_free)");
}

Graph make_complete(std::size_t n) {
  Graph g(n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) g.add_edge(u, v);
  }
  return g;
}

Graph make_star(std::size_t leaves) {
  Graph g(leaves + 1);
  for (NodeId v = 1; v <= leaves; ++v) g.add_edge(0, v);
  return g;
}

Graph make_path(std::size_t n) {
  Graph g(n);
  for (NodeId v = 1; v < n; ++v) g.add_edge(v - 1, v);
  return g;
}

Graph make_ring_lattice(std::size_t n, std::size_t degree) {
  if (degree % 2 != 0) throw TopologyError("ring lattice degree must be even, got " + std::to_string(degree));
  if (degree >= n) throw TopologyError("ring lattice degree " + std::to_string(degree) + " needs more than that many nodes");
  Graph g(n);
  for (NodeId u = 0; u < n; ++u) {
    for (std::size_t j = 1; j <= degree / 2; ++j) g.add_edge(u, (u + j) % n);
  }
  return g;
}

namespace {

std::size_t resolve_degree(TopologyKind kind, std::size_t n, const TopologyParams& params) {
  double d = params.mean_degree.value_or(kind == TopologyKind::Ring ? 2.0 : 6.0);
  if (!(d >= 1.0)) throw TopologyError("mean degree must be at least 1");
  if (d >= static_cast<double>(n)) {
    throw TopologyError("mean degree " + std::to_string(d) + " infeasible for " + std::to_string(n) + " nodes");
  }
  return static_cast<std::size_t>(std::llround(d));
}

// Joins components by linking their least-degree members (ties: lowest id)
// until the graph is connected.
void connect_components(Graph& g) {
  for (;;) {
    auto comps = connected_components(g);
    if (comps.size() <= 1) return;
    auto least = [&](const std::vector<NodeId>& comp) {
      return *std::min_element(comp.begin(), comp.end(), [&](NodeId a, NodeId b) {
        return g.degree(a) != g.degree(b) ? g.degree(a) < g.degree(b) : a < b;
      });
    };
    g.add_edge(least(comps[0]), least(comps[1]));
  }
}

Graph grid(std::size_t n) {
  auto rows = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (rows > 1 && n % rows != 0) --rows;
  if (rows < 3) throw TopologyError("grid needs n with a factorization r x c, 3 <= r <= c; got n=" + std::to_string(n));
  const std::size_t cols = n / rows;
  Graph g(n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const NodeId u = r * cols + c;
      g.add_edge(u, r * cols + (c + 1) % cols);
      g.add_edge(u, ((r + 1) % rows) * cols + c);
    }
  }
  return g;
}

Graph erdos_renyi(std::size_t n, double p, Rng& rng) {
  Graph g(n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.bernoulli(p)) g.add_edge(u, v);
    }
  }
  connect_components(g);
  return g;
}

Graph watts_strogatz(std::size_t n, std::size_t k, double p, Rng& rng) {
  Graph g = make_ring_lattice(n, k);
  for (NodeId u = 0; u < n; ++u) {
    for (std::size_t j = 1; j <= k / 2; ++j) {
      const NodeId v = (u + j) % n;
      if (!rng.bernoulli(p)) continue;
      if (g.degree(u) >= n - 1) continue;
      // Uniform over nodes that are neither u nor already adjacent to u.
      std::size_t pick = rng.index(n - 1 - g.degree(u));
      NodeId w = 0;
      for (;; ++w) {
        if (w == u || g.has_edge(u, w)) continue;
        if (pick-- == 0) break;
      }
      g.remove_edge(u, v);
      g.add_edge(u, w);
    }
  }
  return g;
}

Graph barabasi_albert(std::size_t n, std::size_t m, Rng& rng) {
  if (m < 1) throw TopologyError("scale-free attachment count must be at least 1");
  if (n <= m + 1) throw TopologyError("scale-free graph needs more than m+1 nodes");
  Graph g = make_complete(m + 1);
  Graph out(n);
  std::vector<NodeId> endpoints;
  for (auto [u, v] : g.edges()) {
    out.add_edge(u, v);
    endpoints.push_back(u);
    endpoints.push_back(v);
  }
  std::vector<NodeId> targets;
  for (NodeId u = m + 1; u < n; ++u) {
    targets.clear();
    while (targets.size() < m) {
      const NodeId t = endpoints[rng.index(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      out.add_edge(u, t);
      endpoints.push_back(u);
      endpoints.push_back(t);
    }
  }
  return out;
}

}  // namespace

Graph generate(TopologyKind kind, std::size_t n, const TopologyParams& params, std::uint64_t seed) {
  if (n < 2) throw TopologyError("graph needs at least 2 nodes");
  Rng rng(seed);
  switch (kind) {
    case TopologyKind::Grid:
      return grid(n);
    case TopologyKind::Ring: {
      const std::size_t d = resolve_degree(kind, n, params);
      if (d == n - 1) return make_complete(n);
      return make_ring_lattice(n, d);
    }
    case TopologyKind::Random: {
      const std::size_t d = resolve_degree(kind, n, params);
      const double p = params.edge_probability.value_or(static_cast<double>(d) / static_cast<double>(n - 1));
      if (!(p >= 0.0 && p <= 1.0)) throw TopologyError("edge probability outside [0,1]");
      return erdos_renyi(n, p, rng);
    }
    case TopologyKind::SmallWorld: {
      const std::size_t d = resolve_degree(kind, n, params);
      if (d == n - 1) return make_complete(n);
      const double p = params.rewire_probability;
      if (!(p >= 0.0 && p <= 1.0)) throw TopologyError("rewiring probability outside [0,1]");
      // Rewiring can disconnect the lattice; redraw so the edge count stays exact.
      for (int attempt = 0; attempt < 100; ++attempt) {
        Graph g = watts_strogatz(n, d, p, rng);
        if (is_connected(g)) return g;
      }
      Graph g = watts_strogatz(n, d, p, rng);
      connect_components(g);
      return g;
    }
    case TopologyKind::ScaleFree: {
      const std::size_t d = resolve_degree(kind, n, params);
      return barabasi_albert(n, std::max<std::size_t>(1, d / 2), rng);
    }
  }
  throw TopologyError("unsupported topology");
}

std::vector<std::size_t> bfs_distances(const Graph& g, NodeId source) {
  std::vector<std::size_t> dist(g.num_nodes(), kUnreachable);
  std::vector<NodeId> queue;
  queue.reserve(g.num_nodes());
  dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::optional<std::size_t> shortest_path_distance(const Graph& g, NodeId u, NodeId v) {
  if (u >= g.num_nodes() || v >= g.num_nodes()) throw TopologyError("node out of range");
  const auto d = bfs_distances(g, u)[v];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

std::vector<std::size_t> all_pairs_distances(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::size_t> out(n * n);
  for (NodeId u = 0; u < n; ++u) {
    auto d = bfs_distances(g, u);
    std::copy(d.begin(), d.end(), out.begin() + static_cast<std::ptrdiff_t>(u * n));
  }
  return out;
}

std::size_t diameter(const Graph& g) {
  std::size_t best = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (auto d : bfs_distances(g, u)) {
      if (d != kUnreachable) best = std::max(best, d);
    }
  }
  return best;
}

std::vector<std::vector<NodeId>> connected_components(const Graph& g) {
  std::vector<std::vector<NodeId>> comps;
  std::vector<bool> seen(g.num_nodes(), false);
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (seen[s]) continue;
    std::vector<NodeId> comp{s};
    seen[s] = true;
    for (std::size_t head = 0; head < comp.size(); ++head) {
      for (NodeId v : g.neighbors(comp[head])) {
        if (!seen[v]) {
          seen[v] = true;
          comp.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

bool is_connected(const Graph& g) {
  if (g.num_nodes() == 0) return true;
  const auto d = bfs_distances(g, 0);
  return std::none_of(d.begin(), d.end(), [](std::size_t x) { return x == kUnreachable; });
}

std::string_view to_string(CentralityMetric metric) {
  switch (metric) {
    case CentralityMetric::Degree: return "DC";
    case CentralityMetric::Betweenness: return "BC";
    case CentralityMetric::Closeness: return "CC";
    case CentralityMetric::Eigenvector: return "EC";
  }
  return "?";
}

CentralityMetric parse_centrality_metric(std::string_view name) {
  for (auto m : {CentralityMetric::Degree, CentralityMetric::Betweenness, CentralityMetric::Closeness,
                 CentralityMetric::Eigenvector}) {
    if (to_string(m) == name) return m;
  }
  throw TopologyError("unknown centrality metric '" + std::string(name) + "' (expected DC, BC, CC or EC)");
}

namespace {

std::vector<double> brandes(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> bc(n, 0.0);
  std::vector<NodeId> order;
  std::vector<std::vector<NodeId>> preds(n);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<std::size_t> dist(n);
  order.reserve(n);
  for (NodeId s = 0; s < n; ++s) {
    order.clear();
    for (auto& p : preds) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), kUnreachable);
    sigma[s] = 1.0;
    dist[s] = 0;
    order.push_back(s);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const NodeId u = order[head];
      for (NodeId v : g.neighbors(u)) {
        if (dist[v] == kUnreachable) {
          dist[v] = dist[u] + 1;
          order.push_back(v);
        }
        if (dist[v] == dist[u] + 1) {
          sigma[v] += sigma[u];
          preds[v].push_back(u);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeId w = *it;
      for (NodeId v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  // Each unordered pair was visited from both endpoints.
  for (auto& x : bc) x /= 2.0;
  return bc;
}

std::vector<double> closeness(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> cc(n, 0.0);
  if (n < 2) return cc;
  for (NodeId u = 0; u < n; ++u) {
    double total = 0.0;
    for (auto d : bfs_distances(g, u)) total += static_cast<double>(d);
    cc[u] = static_cast<double>(n - 1) / total;
  }
  return cc;
}

std::vector<double> eigenvector(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> x(n, 1.0);
  std::vector<double> ax(n);
  auto multiply = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (NodeId u = 0; u < n; ++u) {
      double s = 0.0;
      for (NodeId v : g.neighbors(u)) s += in[v];
      out[u] = s;
    }
  };
  auto norm2 = [](const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  };
  // Iterating on A + I keeps bipartite graphs from oscillating; the
  // eigenvectors are unchanged.
  constexpr int kMaxIterations = 200000;
  for (int it = 0; it < kMaxIterations; ++it) {
    multiply(x, ax);
    const double xx = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
    const double lambda = std::inner_product(x.begin(), x.end(), ax.begin(), 0.0) / xx;
    double res = 0.0;
    for (NodeId u = 0; u < n; ++u) res += (ax[u] - lambda * x[u]) * (ax[u] - lambda * x[u]);
    if (std::sqrt(res) <= 1e-10 * std::max(1.0, std::abs(lambda)) * std::sqrt(xx)) break;
    for (NodeId u = 0; u < n; ++u) ax[u] += x[u];
    const double nrm = norm2(ax);
    for (NodeId u = 0; u < n; ++u) x[u] = ax[u] / nrm;
  }
  const double mx = *std::max_element(x.begin(), x.end());
  for (auto& v : x) v /= mx;
  return x;
}

}  // namespace

CentralityScores centrality(const Graph& g, CentralityMetric metric) {
  CentralityScores out{metric, {}};
  switch (metric) {
    case CentralityMetric::Degree:
      out.scores.resize(g.num_nodes());
      for (NodeId u = 0; u < g.num_nodes(); ++u) out.scores[u] = static_cast<double>(g.degree(u));
      break;
    case CentralityMetric::Betweenness:
      out.scores = brandes(g);
      break;
    case CentralityMetric::Closeness:
      if (!is_connected(g)) throw TopologyError("closeness centrality (CC) requires a connected graph");
      out.scores = closeness(g);
      break;
    case CentralityMetric::Eigenvector:
      if (!is_connected(g)) throw TopologyError("eigenvector centrality (EC) requires a connected graph");
      out.scores = eigenvector(g);
      break;
  }
  return out;
}

std::vector<double> betweenness_by_enumeration(const Graph& g) {
  const std::size_t n = g.num_nodes();
  const auto dist = all_pairs_distances(g);
  std::vector<double> bc(n, 0.0);
  std::vector<NodeId> path;
  for (NodeId s = 0; s < n; ++s) {
    for (NodeId t = s + 1; t < n; ++t) {
      if (dist[s * n + t] == kUnreachable) continue;
      std::vector<std::size_t> through(n, 0);
      std::size_t total = 0;
      // Every walk that moves one hop closer to t at each step is a shortest path.
      std::function<void(NodeId)> walk = [&](NodeId u) {
        if (u == t) {
          ++total;
          for (std::size_t i = 1; i + 1 < path.size(); ++i) ++through[path[i]];
          return;
        }
        for (NodeId v : g.neighbors(u)) {
          if (dist[v * n + t] + 1 == dist[u * n + t]) {
            path.push_back(v);
            walk(v);
            path.pop_back();
          }
        }
      };
      path.assign(1, s);
      walk(s);
      for (NodeId v = 0; v < n; ++v) bc[v] += static_cast<double>(through[v]) / static_cast<double>(total);
    }
  }
  return bc;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: need two equal-length samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

void write_edge_list(const Graph& g, std::ostream& out) {
  out << g.num_nodes() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

Graph read_edge_list(std::istream& in) {
  std::string line;
  std::optional<Graph> g;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    if (!g) {
      std::size_t n = 0;
      if (!(fields >> n)) continue;
      g.emplace(n);
      continue;
    }
    NodeId u = 0;
    NodeId v = 0;
    if (!(fields >> u)) continue;
    if (!(fields >> v)) throw TopologyError("edge list line " + std::to_string(line_no) + ": expected 'u v'");
    if (u >= g->num_nodes() || v >= g->num_nodes() || u == v) {
      throw TopologyError("edge list line " + std::to_string(line_no) + ": invalid edge");
    }
    g->add_edge(u, v);
  }
  if (!g) throw TopologyError("edge list has no node-count header");
  return *g;
}

void save_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw TopologyError("cannot write " + path.string());
  write_edge_list(g, out);
}

Graph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open " + path.string());
  return read_edge_list(in);
}

}  // namespace normsim
