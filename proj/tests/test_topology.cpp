#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "normsim/rng.hpp"
#include "normsim/topology.hpp"

using namespace normsim;

namespace {

// Betweenness by listing every shortest path explicitly (DFS along
// distance-decreasing edges).
std::vector<double> betweenness_oracle(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> bc(n, 0.0);
  for (NodeId s = 0; s < n; ++s) {
    for (NodeId t = s + 1; t < n; ++t) {
      const auto dt = bfs_distances(g, t);
      if (dt[s] == kUnreachable) continue;
      std::vector<std::vector<NodeId>> paths;
      std::vector<NodeId> cur{s};
      std::function<void(NodeId)> walk = [&](NodeId v) {
        if (v == t) {
          paths.push_back(cur);
          return;
        }
        for (NodeId w : g.neighbors(v)) {
          if (dt[w] + 1 != dt[v]) continue;
          cur.push_back(w);
          walk(w);
          cur.pop_back();
        }
      };
      walk(s);
      for (const auto& p : paths) {
        for (std::size_t i = 1; i + 1 < p.size(); ++i) bc[p[i]] += 1.0 / static_cast<double>(paths.size());
      }
    }
  }
  return bc;
}

Graph random_connected(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  for (;;) {
    Graph g(n);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (rng.bernoulli(p)) g.add_edge(u, v);
      }
    }
    if (is_connected(g)) return g;
  }
}

TopologyParams degree(double d) {
  TopologyParams p;
  p.mean_degree = d;
  return p;
}

}  // namespace

TEST_CASE("graph rejects self-loops and duplicates") {
  Graph g(3);
  CHECK(g.add_edge(0, 1));
  CHECK_FALSE(g.add_edge(1, 0));
  CHECK_THROWS_AS(g.add_edge(2, 2), TopologyError);
  CHECK_THROWS_AS(g.add_edge(0, 3), TopologyError);
  CHECK(g.num_edges() == 1);
  CHECK(g.remove_edge(0, 1));
  CHECK(g.num_edges() == 0);
}

TEST_CASE("star centralities") {
  const auto g = make_star(4);
  const auto dc = centrality(g, CentralityMetric::Degree).scores;
  const auto bc = centrality(g, CentralityMetric::Betweenness).scores;
  CHECK(dc[0] == 4.0);
  CHECK(bc[0] == doctest::Approx(6.0));
  for (NodeId v = 1; v <= 4; ++v) {
    CHECK(dc[v] == 1.0);
    CHECK(bc[v] == doctest::Approx(0.0));
  }
  CHECK(bc == betweenness_oracle(g));
}

TEST_CASE("path closeness") {
  const auto cc = centrality(make_path(3), CentralityMetric::Closeness).scores;
  CHECK(cc[1] == doctest::Approx(1.0));
  CHECK(cc[0] == doctest::Approx(1.0 / 1.5));
}

TEST_CASE("betweenness matches explicit path enumeration on small graphs") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t n = 3 + seed % 6;
    const auto g = random_connected(n, 0.45, seed);
    const auto fast = centrality(g, CentralityMetric::Betweenness).scores;
    const auto slow = betweenness_oracle(g);
    const auto lib = betweenness_by_enumeration(g);
    for (std::size_t v = 0; v < n; ++v) {
      CHECK(fast[v] == doctest::Approx(slow[v]).epsilon(1e-9));
      CHECK(lib[v] == doctest::Approx(slow[v]).epsilon(1e-9));
    }
  }
}

TEST_CASE("eigenvector centrality has unit max and satisfies the eigen-equation") {
  TopologyParams p = degree(6);
  const auto g = generate(TopologyKind::ScaleFree, 80, p, 4);
  const auto ec = centrality(g, CentralityMetric::Eigenvector).scores;
  CHECK(*std::max_element(ec.begin(), ec.end()) == doctest::Approx(1.0));
  // A x = lambda x, with lambda estimated at the max entry.
  const auto top = static_cast<NodeId>(std::max_element(ec.begin(), ec.end()) - ec.begin());
  double lambda = 0.0;
  for (NodeId w : g.neighbors(top)) lambda += ec[w];
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    double ax = 0.0;
    for (NodeId w : g.neighbors(v)) ax += ec[w];
    CHECK(ax == doctest::Approx(lambda * ec[v]).epsilon(1e-6));
    CHECK(ec[v] >= 0.0);
  }
}

TEST_CASE("closeness and eigenvector reject disconnected graphs") {
  Graph g(4);
  g.add_edge(0, 1);
  g.add_edge(2, 3);
  CHECK_THROWS_AS(centrality(g, CentralityMetric::Closeness), TopologyError);
  CHECK_THROWS_AS(centrality(g, CentralityMetric::Eigenvector), TopologyError);
}

TEST_CASE("ring of 6 has diameter 3 by brute force") {
  const auto g = make_ring_lattice(6, 2);
  std::size_t worst = 0;
  for (NodeId u = 0; u < 6; ++u) {
    for (NodeId v = 0; v < 6; ++v) {
      // Walking either way round the ring.
      const std::size_t cw = (v + 6 - u) % 6;
      const std::size_t hops = std::min(cw, 6 - cw);
      CHECK(shortest_path_distance(g, u, v) == hops);
      worst = std::max(worst, hops);
    }
  }
  CHECK(worst == 3);
  CHECK(diameter(g) == 3);
}

TEST_CASE("unreachable distance is empty") {
  Graph g(3);
  g.add_edge(0, 1);
  CHECK_FALSE(shortest_path_distance(g, 0, 2).has_value());
}

TEST_CASE("every generator gives a connected, deterministic graph") {
  for (auto kind : {TopologyKind::Grid, TopologyKind::Ring, TopologyKind::Random, TopologyKind::SmallWorld,
                    TopologyKind::ScaleFree}) {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
      const auto g = generate(kind, 100, {}, seed);
      INFO(to_string(kind), " seed ", seed);
      CHECK(g.num_nodes() == 100);
      CHECK(is_connected(g));
      CHECK(g == generate(kind, 100, {}, seed));
    }
  }
}

TEST_CASE("default small-world and scale-free mean degree is about 6") {
  CHECK(generate(TopologyKind::SmallWorld, 100, {}, 3).mean_degree() == doctest::Approx(6.0));
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) sum += generate(TopologyKind::ScaleFree, 100, {}, seed).mean_degree();
  CHECK(std::abs(sum / 20 - 6.0) < 0.5);
}

TEST_CASE("scale-free degree tail") {
  double ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = generate(TopologyKind::ScaleFree, 500, degree(6), seed);
    std::size_t top = 0;
    for (NodeId v = 0; v < 500; ++v) top = std::max(top, g.degree(v));
    ratio += static_cast<double>(top) / g.mean_degree();
  }
  CHECK(ratio / 100 >= 3.0);
}

TEST_CASE("infeasible parameters are rejected") {
  CHECK_THROWS_AS(generate(TopologyKind::SmallWorld, 6, degree(6), 1), TopologyError);
  CHECK_THROWS_AS(generate(TopologyKind::Grid, 7, {}, 1), TopologyError);
  CHECK_THROWS_AS(parse_topology_kind("torus"), TopologyError);
}

TEST_CASE("edge list round trip") {
  const auto g = generate(TopologyKind::SmallWorld, 40, degree(4), 8);
  std::stringstream ss;
  write_edge_list(g, ss);
  CHECK(read_edge_list(ss) == g);
}

TEST_CASE("pearson correlation") {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {2, 4, 6, 8};
  const std::vector<double> z = {4, 3, 2, 1};
  CHECK(pearson_correlation(x, y) == doctest::Approx(1.0));
  CHECK(pearson_correlation(x, z) == doctest::Approx(-1.0));
}
