#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fairbench {

using node_t = std::uint32_t;
using Edge = std::pair<node_t, node_t>;

/// Input that violates a documented precondition (bad ids, malformed files, bad config).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantity that is mathematically undefined for the given graph/labels.
class UndefinedMeasure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hop distance with an explicit "unreachable" state.
struct Distance {
  static constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t hops = kUnreachable;

  bool reachable() const { return hops != kUnreachable; }
  bool operator==(const Distance&) const = default;
};

/// Undirected simple graph on nodes 0..n-1. Immutable after construction.
///
/// Edges are stored once in canonical (u < v) order, sorted; adjacency lists
/// are sorted and mirrored.
class Graph {
 public:
  Graph() = default;

  /// Builds from an arbitrary edge list. Reversed duplicates collapse;
  /// self-loops and out-of-range endpoints throw InputError.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges) {
    std::vector<Edge> canon;
    canon.reserve(edges.size());
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) {
        throw InputError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                         ") has an endpoint outside 0.." + std::to_string(n == 0 ? 0 : n - 1));
      }
      if (u == v) throw InputError("self-loop on node " + std::to_string(u));
      canon.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(canon.begin(), canon.end());
    canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

    Graph g;
    g.adj_.assign(n, {});
    for (auto [u, v] : canon) {
      g.adj_[u].push_back(v);
      g.adj_[v].push_back(u);
    }
    for (auto& nb : g.adj_) std::sort(nb.begin(), nb.end());
    g.edges_ = std::move(canon);
    return g;
  }

  static Graph from_edges(std::size_t n, std::initializer_list<Edge> edges) {
    return from_edges(n, std::span<const Edge>(edges.begin(), edges.size()));
  }

  std::size_t num_nodes() const { return adj_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t degree(node_t u) const { return adj_[u].size(); }
  std::span<const node_t> neighbors(node_t u) const { return adj_[u]; }
  std::span<const Edge> edges() const { return edges_; }

  bool has_edge(node_t u, node_t v) const {
    const auto& nb = adj_[u].size() <= adj_[v].size() ? adj_[u] : adj_[v];
    node_t other = adj_[u].size() <= adj_[v].size() ? v : u;
    return std::binary_search(nb.begin(), nb.end(), other);
  }

  double mean_degree() const {
    return adj_.empty() ? 0.0 : 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(adj_.size());
  }

  bool operator==(const Graph& o) const { return adj_.size() == o.adj_.size() && edges_ == o.edges_; }

 private:
  std::vector<std::vector<node_t>> adj_;
  std::vector<Edge> edges_;
};

/// Per-node binary sensitive attribute; 1 marks the sensitive group.
class SensitiveLabels {
 public:
  SensitiveLabels() = default;
  explicit SensitiveLabels(std::vector<std::uint8_t> s) : s_(std::move(s)) {
    for (auto x : s_) {
      if (x > 1) throw InputError("sensitive label must be 0 or 1, got " + std::to_string(int(x)));
      ++count_[x];
    }
  }

  std::size_t size() const { return s_.size(); }
  std::uint8_t operator[](node_t u) const { return s_[u]; }
  std::size_t count(int group) const { return count_[group]; }
  std::span<const std::uint8_t> values() const { return s_; }

  SensitiveLabels swapped() const {
    std::vector<std::uint8_t> t(s_);
    for (auto& x : t) x = 1 - x;
    return SensitiveLabels(std::move(t));
  }

  bool operator==(const SensitiveLabels& o) const { return s_ == o.s_; }

 private:
  std::vector<std::uint8_t> s_;
  std::size_t count_[2] = {0, 0};
};

inline std::vector<Distance> bfs_distances(const Graph& g, node_t source) {
  if (source >= g.num_nodes()) throw InputError("bfs source out of range");
  std::vector<Distance> dist(g.num_nodes());
  std::vector<node_t> queue;
  queue.reserve(g.num_nodes());
  dist[source].hops = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    node_t u = queue[head];
    for (node_t v : g.neighbors(u)) {
      if (!dist[v].reachable()) {
        dist[v].hops = dist[u].hops + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

/// Edges inside `nodes` divided by C(|nodes|, 2). Requires at least two distinct nodes.
inline double induced_density(const Graph& g, std::span<const node_t> nodes) {
  std::vector<node_t> set(nodes.begin(), nodes.end());
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  if (set.size() < 2) throw UndefinedMeasure("induced density needs at least two nodes");
  std::size_t inside = 0;
  for (node_t u : set) {
    for (node_t v : g.neighbors(u)) {
      if (v > u && std::binary_search(set.begin(), set.end(), v)) ++inside;
    }
  }
  double k = static_cast<double>(set.size());
  return static_cast<double>(inside) / (k * (k - 1.0) / 2.0);
}

/// Component id per node, ids ordered by smallest member.
inline std::vector<std::uint32_t> connected_components(const Graph& g, std::size_t* count = nullptr) {
  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> comp(g.num_nodes(), kNone);
  std::uint32_t next = 0;
  std::vector<node_t> stack;
  for (node_t s = 0; s < g.num_nodes(); ++s) {
    if (comp[s] != kNone) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      node_t u = stack.back();
      stack.pop_back();
      for (node_t v : g.neighbors(u)) {
        if (comp[v] == kNone) {
          comp[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return comp;
}

inline bool is_connected(const Graph& g) {
  std::size_t c = 0;
  connected_components(g, &c);
  return c <= 1;
}

/// Subgraph induced by `keep` (sorted, unique), relabeled 0..|keep|-1 in order.
inline Graph induced_subgraph(const Graph& g, std::span<const node_t> keep) {
  std::vector<node_t> index(g.num_nodes(), std::numeric_limits<node_t>::max());
  for (std::size_t i = 0; i < keep.size(); ++i) index[keep[i]] = static_cast<node_t>(i);
  std::vector<Edge> edges;
  for (auto [u, v] : g.edges()) {
    if (index[u] != std::numeric_limits<node_t>::max() && index[v] != std::numeric_limits<node_t>::max()) {
      edges.emplace_back(index[u], index[v]);
    }
  }
  return Graph::from_edges(keep.size(), edges);
}

/// Nodes of the largest connected component (ties: the one with the smallest node), sorted.
inline std::vector<node_t> largest_component(const Graph& g) {
  std::size_t count = 0;
  auto comp = connected_components(g, &count);
  std::vector<std::size_t> sizes(count, 0);
  for (auto c : comp) ++sizes[c];
  std::size_t best = 0;
  for (std::size_t c = 1; c < count; ++c) {
    if (sizes[c] > sizes[best]) best = c;
  }
  std::vector<node_t> out;
  for (node_t u = 0; u < g.num_nodes(); ++u) {
    if (comp[u] == best) out.push_back(u);
  }
  return out;
}

}  // namespace fairbench
