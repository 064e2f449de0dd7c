#include "normsim/grouping.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace normsim {

std::string_view to_string(GroupingKind kind) {
  switch (kind) {
    case GroupingKind::Random: return "random";
    case GroupingKind::Degree: return "degree";
    case GroupingKind::KMeans: return "kmeans";
    case GroupingKind::KernighanLin: return "kernighan_lin";
  }
  return "?";
}

GroupingKind parse_grouping_kind(std::string_view name) {
  for (auto k : {GroupingKind::Random, GroupingKind::Degree, GroupingKind::KMeans, GroupingKind::KernighanLin}) {
    if (to_string(k) == name) return k;
  }
  throw GroupingError("unknown grouping '" + std::string(name) + "' (expected random, degree, kmeans or kernighan_lin)");
}

void neighboring_degrees(const Graph& graph, Grouping& grouping) {
  const std::size_t k = grouping.num_groups();
  std::vector<std::map<GroupId, std::size_t>> counts(k);
  for (auto [u, v] : graph.edges()) {
    const GroupId gu = grouping.group_of_node[u];
    const GroupId gv = grouping.group_of_node[v];
    if (gu == gv) continue;
    ++counts[gu][gv];
    ++counts[gv][gu];
  }
  grouping.links.assign(k, {});
  for (GroupId g = 0; g < k; ++g) {
    std::size_t total = 0;
    for (auto [other, c] : counts[g]) total += c;
    for (auto [other, c] : counts[g]) {
      grouping.links[g].push_back({other, c, static_cast<double>(c) / static_cast<double>(total)});
    }
  }
}

Grouping make_grouping(const Graph& graph, const std::vector<GroupId>& group_of_node,
                       const std::vector<NodeId>& supervisors) {
  const std::size_t n = graph.num_nodes();
  if (group_of_node.size() != n) throw GroupingError("group assignment size does not match graph");
  Grouping out;
  out.group_of_node = group_of_node;
  out.groups.assign(supervisors.size(), {});
  for (NodeId v = 0; v < n; ++v) {
    if (group_of_node[v] >= supervisors.size()) throw GroupingError("group id out of range");
    out.groups[group_of_node[v]].push_back(v);
  }
  out.supervisor_of_group = supervisors;
  for (GroupId g = 0; g < supervisors.size(); ++g) {
    if (out.groups[g].empty()) throw GroupingError("empty group " + std::to_string(g));
    if (group_of_node[supervisors[g]] != g) throw GroupingError("supervisor outside its group");
  }
  neighboring_degrees(graph, out);
  return out;
}

std::optional<std::string> validate(const Graph& graph, const Grouping& grouping) {
  const std::size_t n = graph.num_nodes();
  if (grouping.group_of_node.size() != n) return "group_of_node has wrong size";
  if (grouping.supervisor_of_group.size() != grouping.groups.size()) return "one supervisor per group required";
  std::vector<int> seen(n, 0);
  for (GroupId g = 0; g < grouping.groups.size(); ++g) {
    if (grouping.groups[g].empty()) return "group " + std::to_string(g) + " is empty";
    for (NodeId v : grouping.groups[g]) {
      if (v >= n) return "node out of range";
      if (seen[v]++) return "node " + std::to_string(v) + " in more than one group";
      if (grouping.group_of_node[v] != g) return "group_of_node disagrees with groups";
    }
    if (grouping.group_of_node[grouping.supervisor_of_group[g]] != g) {
      return "supervisor of group " + std::to_string(g) + " is not a member";
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (!seen[v]) return "node " + std::to_string(v) + " not in any group";
  }
  if (grouping.links.size() != grouping.groups.size()) return "links not computed";
  for (GroupId g = 0; g < grouping.groups.size(); ++g) {
    for (const auto& link : grouping.links[g]) {
      bool crosses = false;
      for (NodeId v : grouping.groups[g]) {
        for (NodeId w : graph.neighbors(v)) crosses = crosses || grouping.group_of_node[w] == link.group;
      }
      if (!crosses || !(link.degree > 0.0)) return "link without crossing edge";
    }
  }
  return std::nullopt;
}

Grouping group_random(const Graph& graph, std::size_t k, std::uint64_t seed) {
  const std::size_t n = graph.num_nodes();
  if (k < 1 || k > n) throw GroupingError("random grouping needs 1 <= k <= n, got k=" + std::to_string(k));
  Rng rng(seed);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  std::vector<GroupId> assign(n);
  std::vector<std::vector<NodeId>> members(k);
  // The first n % k groups take one extra member.
  std::size_t pos = 0;
  for (GroupId g = 0; g < k; ++g) {
    const std::size_t size = n / k + (g < n % k ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) {
      assign[order[pos]] = g;
      members[g].push_back(order[pos]);
      ++pos;
    }
  }
  std::vector<NodeId> supervisors(k);
  for (GroupId g = 0; g < k; ++g) {
    std::sort(members[g].begin(), members[g].end());
    supervisors[g] = members[g][rng.index(members[g].size())];
  }
  return make_grouping(graph, assign, supervisors);
}

Grouping group_degree(const Graph& graph, std::uint64_t seed) {
  const std::size_t n = graph.num_nodes();
  std::map<std::size_t, GroupId> by_degree;
  for (NodeId v = 0; v < n; ++v) by_degree.emplace(graph.degree(v), 0);
  GroupId next = 0;
  for (auto& [deg, g] : by_degree) g = next++;
  std::vector<GroupId> assign(n);
  std::vector<std::vector<NodeId>> members(by_degree.size());
  for (NodeId v = 0; v < n; ++v) {
    assign[v] = by_degree.at(graph.degree(v));
    members[assign[v]].push_back(v);
  }
  Rng rng(seed);
  std::vector<NodeId> supervisors(members.size());
  for (GroupId g = 0; g < members.size(); ++g) supervisors[g] = members[g][rng.index(members[g].size())];
  return make_grouping(graph, assign, supervisors);
}

Grouping group_kmeans(const Graph& graph, std::size_t k, const KMeansOptions& options, std::uint64_t seed) {
  const std::size_t n = graph.num_nodes();
  if (k < 1 || k > n) throw GroupingError("k-means grouping needs 1 <= k <= n, got k=" + std::to_string(k));
  const std::size_t even_share = (n + k - 1) / k;
  const std::size_t dist_max = options.dist_max.value_or((diameter(graph) + 1) / 2);
  const std::size_t size_max = options.size_max.value_or(2 * even_share);
  if (dist_max < 1) throw GroupingError("k-means dist_max must be at least 1");
  if (size_max < even_share) throw GroupingError("k-means size_max must be at least ceil(n/k)");

  const auto dist = all_pairs_distances(graph);
  auto d = [&](NodeId u, NodeId v) {
    const auto x = dist[u * n + v];
    return x == kUnreachable ? n : x;
  };
  Rng rng(seed);

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  std::vector<NodeId> centers(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));

  constexpr GroupId kNone = std::numeric_limits<GroupId>::max();
  std::vector<GroupId> assign(n, kNone);
  std::vector<std::size_t> count(k, 0);
  std::vector<GroupId> tied;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    bool changed = false;
    for (NodeId v = 0; v < n; ++v) {
      std::size_t best = std::numeric_limits<std::size_t>::max();
      tied.clear();
      for (GroupId g = 0; g < k; ++g) {
        const auto x = d(v, centers[g]);
        if (x < best) {
          best = x;
          tied.assign(1, g);
        } else if (x == best) {
          tied.push_back(g);
        }
      }
      // Ties go to the smallest tied group, uniformly among equals. A node
      // already in a tied group moves only if that shrinks the size gap, so
      // every move lowers the sum of squared sizes and the pass terminates.
      GroupId pick = tied.front();
      if (tied.size() > 1) {
        std::size_t smallest = std::numeric_limits<std::size_t>::max();
        for (GroupId g : tied) {
          if (g != assign[v]) smallest = std::min(smallest, count[g]);
        }
        const bool here = std::find(tied.begin(), tied.end(), assign[v]) != tied.end();
        if (here && count[assign[v]] <= smallest + 1) {
          pick = assign[v];
        } else {
          std::erase_if(tied, [&](GroupId g) { return g == assign[v] || count[g] != smallest; });
          pick = tied[rng.index(tied.size())];
        }
      }
      if (pick != assign[v]) {
        if (assign[v] != kNone) --count[assign[v]];
        ++count[pick];
        assign[v] = pick;
        changed = true;
      }
    }
    bool moved = false;
    for (GroupId g = 0; g < k; ++g) {
      // New center: the member minimizing total hop distance to the group.
      // Ties keep the current center, then prefer the lowest id.
      auto cost_of = [&](NodeId c) {
        std::size_t cost = 0;
        for (NodeId v = 0; v < n; ++v) {
          if (assign[v] == g) cost += d(c, v);
        }
        return cost;
      };
      NodeId best = centers[g];
      std::size_t best_cost = assign[best] == g ? cost_of(best) : std::numeric_limits<std::size_t>::max();
      for (NodeId c = 0; c < n; ++c) {
        if (assign[c] != g) continue;
        const std::size_t cost = cost_of(c);
        if (cost < best_cost) {
          best_cost = cost;
          best = c;
        }
      }
      if (best != centers[g]) {
        centers[g] = best;
        moved = true;
      }
    }
    if (!changed && !moved) break;
  }

  std::vector<std::size_t> sizes(k, 0);
  for (NodeId v = 0; v < n; ++v) ++sizes[assign[v]];
  std::vector<std::string> warnings;
  for (NodeId v = 0; v < n; ++v) {
    const GroupId home = assign[v];
    if (centers[home] == v || d(v, centers[home]) <= dist_max) continue;
    --sizes[home];
    GroupId best = kNone;
    GroupId fallback = kNone;
    for (GroupId g = 0; g < k; ++g) {
      if (sizes[g] >= size_max) continue;
      const auto x = d(v, centers[g]);
      if (fallback == kNone || x < d(v, centers[fallback])) fallback = g;
      if (x <= dist_max && (best == kNone || x < d(v, centers[best]))) best = g;
    }
    if (best == kNone) {
      best = fallback;
      warnings.push_back("node " + std::to_string(v) + " is farther than dist_max from every open group");
    }
    assign[v] = best;
    ++sizes[best];
  }

  Grouping out = make_grouping(graph, assign, centers);
  out.warnings = std::move(warnings);
  return out;
}

std::size_t cut_size(const Graph& graph, const std::vector<GroupId>& group_of_node) {
  std::size_t cut = 0;
  for (auto [u, v] : graph.edges()) {
    if (group_of_node[u] != group_of_node[v]) ++cut;
  }
  return cut;
}

KlBisection kernighan_lin_bisect(const Graph& graph, std::vector<NodeId> nodes, KlObjective objective, Rng& rng) {
  const std::size_t n = graph.num_nodes();
  std::sort(nodes.begin(), nodes.end());
  rng.shuffle(nodes.begin(), nodes.end());
  const std::size_t half = nodes.size() / 2;

  // side: 0 left, 1 right, 2 outside the subgraph being split.
  std::vector<int> side(n, 2);
  for (std::size_t i = 0; i < nodes.size(); ++i) side[nodes[i]] = i < half ? 0 : 1;

  auto cut = [&] {
    std::size_t c = 0;
    for (NodeId u : nodes) {
      for (NodeId v : graph.neighbors(u)) {
        if (side[v] != 2 && side[v] != side[u] && u < v) ++c;
      }
    }
    return c;
  };

  const double sign = objective == KlObjective::MinCut ? 1.0 : -1.0;
  KlBisection out;
  out.cut_history.push_back(cut());

  std::vector<double> D(n, 0.0);
  std::vector<bool> locked(n, false);
  constexpr int kMaxPasses = 64;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    for (NodeId u : nodes) {
      double ext = 0.0;
      double in = 0.0;
      for (NodeId v : graph.neighbors(u)) {
        if (side[v] == 2) continue;
        (side[v] == side[u] ? in : ext) += 1.0;
      }
      D[u] = ext - in;
      locked[u] = false;
    }
    std::vector<std::pair<NodeId, NodeId>> swaps;
    std::vector<double> gains;
    const std::size_t steps = std::min(half, nodes.size() - half);
    for (std::size_t step = 0; step < steps; ++step) {
      double best_gain = -std::numeric_limits<double>::infinity();
      NodeId best_a = 0;
      NodeId best_b = 0;
      for (NodeId a : nodes) {
        if (locked[a] || side[a] != 0) continue;
        for (NodeId b : nodes) {
          if (locked[b] || side[b] != 1) continue;
          const double c_ab = graph.has_edge(a, b) ? 1.0 : 0.0;
          const double g = sign * (D[a] + D[b] - 2.0 * c_ab);
          if (g > best_gain) {
            best_gain = g;
            best_a = a;
            best_b = b;
          }
        }
      }
      locked[best_a] = locked[best_b] = true;
      swaps.emplace_back(best_a, best_b);
      gains.push_back(best_gain);
      // Tentatively swap for the D updates of the remaining nodes.
      for (NodeId x : graph.neighbors(best_a)) {
        if (side[x] == 2 || locked[x]) continue;
        D[x] += side[x] == 0 ? 2.0 : -2.0;
      }
      for (NodeId x : graph.neighbors(best_b)) {
        if (side[x] == 2 || locked[x]) continue;
        D[x] += side[x] == 1 ? 2.0 : -2.0;
      }
    }
    double running = 0.0;
    double best_total = 0.0;
    std::size_t best_prefix = 0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
      running += gains[i];
      if (running > best_total + 1e-12) {
        best_total = running;
        best_prefix = i + 1;
      }
    }
    if (best_prefix == 0) break;
    for (std::size_t i = 0; i < best_prefix; ++i) {
      side[swaps[i].first] = 1;
      side[swaps[i].second] = 0;
    }
    out.cut_history.push_back(cut());
  }
  for (NodeId u : nodes) (side[u] == 0 ? out.left : out.right).push_back(u);
  std::sort(out.left.begin(), out.left.end());
  std::sort(out.right.begin(), out.right.end());
  return out;
}

Grouping group_kernighan_lin(const Graph& graph, std::size_t k, std::uint64_t seed, KlObjective objective) {
  const std::size_t n = graph.num_nodes();
  if (k < 1 || (k & (k - 1)) != 0) throw GroupingError("Kernighan-Lin grouping needs k a power of 2, got " + std::to_string(k));
  if (k > n) throw GroupingError("Kernighan-Lin grouping needs k <= n");
  Rng rng(seed);
  std::vector<NodeId> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<NodeId>> parts{all};
  while (parts.size() < k) {
    std::vector<std::vector<NodeId>> next;
    for (auto& part : parts) {
      auto split = kernighan_lin_bisect(graph, part, objective, rng);
      next.push_back(std::move(split.left));
      next.push_back(std::move(split.right));
    }
    parts = std::move(next);
  }
  std::vector<GroupId> assign(n);
  std::vector<NodeId> supervisors;
  for (GroupId g = 0; g < parts.size(); ++g) {
    NodeId sup = parts[g].front();
    for (NodeId v : parts[g]) {
      assign[v] = g;
      if (graph.degree(v) > graph.degree(sup) || (graph.degree(v) == graph.degree(sup) && v < sup)) sup = v;
    }
    supervisors.push_back(sup);
  }
  return make_grouping(graph, assign, supervisors);
}

void write_grouping(const Grouping& grouping, std::ostream& out) {
  out << "# node group\n";
  for (NodeId v = 0; v < grouping.group_of_node.size(); ++v) out << v << ' ' << grouping.group_of_node[v] << '\n';
  out << "# supervisor group node\n";
  for (GroupId g = 0; g < grouping.supervisor_of_group.size(); ++g) {
    out << "supervisor " << g << ' ' << grouping.supervisor_of_group[g] << '\n';
  }
}

}  // namespace normsim
