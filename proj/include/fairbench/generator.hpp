#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/random/gamma_distribution.hpp>

#include "fairbench/graph.hpp"
#include "fairbench/random.hpp"

namespace fairbench {

enum class HomophilyScope {
  kAllConnections,  // every drawn neighbor uses the homophily-biased attachment weights
  kAnchorOnly,      // only the anchor draw is biased; ego draws use hop weights alone
};

/// m' ~ Gamma(shape, m / shape), so E[m'] = m before rounding and clamping.
struct GammaLaw {
  double shape = 1.0;
};
/// m' = round(a * deg(anchor) + b).
struct AffineLaw {
  double a = 0.0;
  double b = 1.0;
};
/// m' = m, the classic Barabasi-Albert rule.
struct FixedLaw {};

using EdgeCountLaw = std::variant<GammaLaw, AffineLaw, FixedLaw>;

struct GenConfig {
  std::size_t n = 500;
  std::size_t m = 3;
  double alpha = 0.5;
  double beta = 0.0;
  bool anchor = false;
  HomophilyScope homophily_scope = HomophilyScope::kAllConnections;
  // hop_weights[k-1] weights nodes k hops from the anchor; the last entry
  // also covers every farther hop.
  std::vector<double> hop_weights;
  EdgeCountLaw edge_count_law = FixedLaw{};
  std::uint64_t seed = 0;

  void validate() const {
    if (m < 1) throw InputError("m must be >= 1");
    if (n <= m) throw InputError("n must exceed m");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw InputError("beta must be finite and >= 0");
    if (anchor && hop_weights.empty()) throw InputError("anchor mode needs hop weights");
    for (double w : hop_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("hop weights must be finite and >= 0");
    }
    if (auto* g = std::get_if<GammaLaw>(&edge_count_law); g && !(g->shape > 0.0)) {
      throw InputError("gamma shape must be > 0");
    }
    if (std::holds_alternative<AffineLaw>(edge_count_law) && !anchor) {
      throw InputError("affine edge-count law needs anchor mode");
    }
  }
};

enum class UseCase { kOpinion, kFriendship, kCollab };

inline std::string to_string(UseCase u) {
  switch (u) {
    case UseCase::kOpinion: return "opinion";
    case UseCase::kFriendship: return "friendship";
    case UseCase::kCollab: return "collab";
  }
  return "?";
}

inline UseCase parse_use_case(const std::string& s) {
  if (s == "opinion") return UseCase::kOpinion;
  if (s == "friendship") return UseCase::kFriendship;
  if (s == "collab") return UseCase::kCollab;
  throw InputError("unknown preset '" + s + "' (expected opinion | friendship | collab)");
}

/// Generation process fitted to each use case. Node count and class
/// imbalance default to the sizes of the matching real datasets; beta is left
/// at 0 for the caller to set or calibrate.
inline GenConfig preset(UseCase u) {
  GenConfig c;
  c.beta = 0.0;
  switch (u) {
    case UseCase::kOpinion:
      c.n = 1222;
      c.alpha = 0.52;
      c.m = 14;
      c.anchor = false;
      c.homophily_scope = HomophilyScope::kAllConnections;
      c.edge_count_law = GammaLaw{0.08};
      break;
    case UseCase::kFriendship:
      c.n = 1034;
      c.alpha = 0.66;
      c.m = 3;
      c.anchor = true;
      c.homophily_scope = HomophilyScope::kAnchorOnly;
      c.hop_weights = {1000.0, 2.0, 1.0};
      c.edge_count_law = AffineLaw{0.55, 3.0};
      break;
    case UseCase::kCollab:
      c.n = 860;
      c.alpha = 0.53;
      c.m = 3;
      c.anchor = true;
      c.homophily_scope = HomophilyScope::kAnchorOnly;
      c.hop_weights = {1.0, 0.0};
      c.edge_count_law = GammaLaw{1.0};
      break;
  }
  return c;
}

/// Exactly round(alpha * n) nodes get label 0, placed by a uniform random permutation.
inline SensitiveLabels assign_sensitive(std::size_t n, double alpha, Rng& rng) {
  if (n < 2) throw InputError("need at least two nodes to assign groups");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
  auto n0 = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 0.5));
  if (n0 == 0 || n0 == n) {
    throw InputError("alpha=" + std::to_string(alpha) + " with n=" + std::to_string(n) + " leaves a group empty");
  }
  std::vector<std::uint8_t> s(n, 1);
  std::fill(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n0), 0);
  shuffle(s.begin(), s.end(), rng);
  return SensitiveLabels(std::move(s));
}

/// Homophily-biased preferential attachment: deg(v) + [S(v) == S(new)] * (e^beta - 1)
/// for each candidate v.
template <typename G>
std::vector<double> attachment_weights(const G& g, const SensitiveLabels& s, node_t v_new, double beta,
                                       std::span<const node_t> candidates) {
  const double bonus = std::expm1(beta);
  std::vector<double> w;
  w.reserve(candidates.size());
  for (node_t v : candidates) {
    w.push_back(static_cast<double>(g.degree(v)) + (s[v] == s[v_new] ? bonus : 0.0));
  }
  return w;
}

/// Hop-weighted distribution over the anchor's ego network, indexed by node.
/// The anchor and nodes in zero-weight hop classes get weight 0.
template <typename G>
std::vector<double> ego_distribution(const G& g, node_t anchor, std::span<const double> hop_weights) {
  std::vector<double> w(g.num_nodes(), 0.0);
  if (hop_weights.empty()) return w;
  // Past the last nonzero class nothing can gain weight, so the BFS stops there.
  std::size_t max_hop = hop_weights.back() > 0.0 ? std::numeric_limits<std::size_t>::max() : 0;
  if (max_hop == 0) {
    for (std::size_t k = hop_weights.size(); k-- > 0;) {
      if (hop_weights[k] > 0.0) {
        max_hop = k + 1;
        break;
      }
    }
  }
  if (max_hop == 0) return w;

  std::vector<std::uint32_t> dist(g.num_nodes(), Distance::kUnreachable);
  std::vector<node_t> queue{anchor};
  dist[anchor] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    node_t u = queue[head];
    if (dist[u] >= max_hop) continue;
    for (node_t v : g.neighbors(u)) {
      if (dist[v] != Distance::kUnreachable) continue;
      dist[v] = dist[u] + 1;
      w[v] = hop_weights[std::min<std::size_t>(dist[v], hop_weights.size()) - 1];
      queue.push_back(v);
    }
  }
  return w;
}

/// Weighted sampling of `k` distinct items without replacement (sequential
/// draws with renormalization). Items with zero weight are never picked unless
/// every weight is zero, in which case the draw is uniform. If fewer than `k`
/// items are eligible, all of them are returned.
inline std::vector<std::size_t> sample_distinct(std::size_t k, std::vector<double> weights, Rng& rng) {
  std::vector<std::size_t> picked;
  std::size_t positive = 0;
  for (double w : weights) positive += w > 0.0;
  if (positive == 0) std::fill(weights.begin(), weights.end(), 1.0);
  std::size_t eligible = positive == 0 ? weights.size() : positive;

  if (k >= eligible) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) picked.push_back(i);
    }
    return picked;
  }
  picked.reserve(k);
  for (std::size_t draw = 0; draw < k; ++draw) {
    double total = 0.0;
    for (double w : weights) total += w;
    double target = uniform01(rng) * total;
    std::size_t chosen = weights.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      chosen = i;
      if (target < acc) break;
    }
    picked.push_back(chosen);
    weights[chosen] = 0.0;
  }
  return picked;
}

inline double round_half_up(double x) { return std::floor(x + 0.5); }

/// One unclamped continuous draw from the Gamma edge-count law.
inline double draw_gamma_edge_count(const GammaLaw& law, double m, Rng& rng) {
  return boost::random::gamma_distribution<double>(law.shape, m / law.shape)(rng);
}

/// Integer edge count m' in [1, cap]. Affine requires the anchor degree.
inline std::size_t sample_edge_count(const EdgeCountLaw& law, double m, std::optional<std::size_t> anchor_deg,
                                     std::size_t cap, Rng& rng) {
  double raw = 0.0;
  if (auto* g = std::get_if<GammaLaw>(&law)) {
    raw = draw_gamma_edge_count(*g, m, rng);
  } else if (auto* a = std::get_if<AffineLaw>(&law)) {
    if (!anchor_deg) throw InputError("affine edge-count law needs the anchor degree");
    raw = a->a * static_cast<double>(*anchor_deg) + a->b;
  } else {
    raw = m;
  }
  double r = round_half_up(raw);
  if (r < 1.0) r = 1.0;
  if (r > static_cast<double>(cap)) r = static_cast<double>(cap);
  return static_cast<std::size_t>(r);
}

namespace detail {

/// Adjacency that grows one node at a time during generation.
class GrowingGraph {
 public:
  explicit GrowingGraph(std::size_t capacity) { adj_.reserve(capacity); }

  void add_node() { adj_.emplace_back(); }
  void add_edge(node_t u, node_t v) {
    adj_[u].push_back(v);
    adj_[v].push_back(u);
    edges_.emplace_back(u, v);
  }
  std::size_t num_nodes() const { return adj_.size(); }
  std::size_t degree(node_t u) const { return adj_[u].size(); }
  std::span<const node_t> neighbors(node_t u) const { return adj_[u]; }
  const std::vector<Edge>& edges() const { return edges_; }

 private:
  std::vector<std::vector<node_t>> adj_;
  std::vector<Edge> edges_;
};

}  // namespace detail

struct GeneratedGraph {
  Graph graph;
  SensitiveLabels labels;
};

/// Extended Barabasi-Albert growth. Pure function of `config` (seed included).
inline GeneratedGraph generate(const GenConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SensitiveLabels labels = assign_sensitive(config.n, config.alpha, rng);

  detail::GrowingGraph g(config.n);
  for (std::size_t i = 0; i < config.m; ++i) g.add_node();
  for (node_t leaf = 1; leaf < config.m; ++leaf) g.add_edge(0, leaf);

  std::vector<node_t> candidates;
  candidates.reserve(config.n);
  for (node_t v = 0; v < config.m; ++v) candidates.push_back(v);

  const double m = static_cast<double>(config.m);
  for (node_t v_new = static_cast<node_t>(config.m); v_new < config.n; ++v_new) {
    const std::size_t existing = v_new;
    auto weights = attachment_weights(g, labels, v_new, config.beta, candidates);
    std::vector<node_t> targets;

    if (config.anchor) {
      node_t anchor = candidates[sample_distinct(1, std::move(weights), rng).front()];
      std::size_t extra = sample_edge_count(config.edge_count_law, m, g.degree(anchor), existing, rng);

      auto ego = ego_distribution(g, anchor, config.hop_weights);
      if (config.homophily_scope == HomophilyScope::kAllConnections) {
        const double bonus = std::expm1(config.beta);
        for (node_t v = 0; v < existing; ++v) {
          if (ego[v] > 0.0) ego[v] *= static_cast<double>(g.degree(v)) + (labels[v] == labels[v_new] ? bonus : 0.0);
        }
      }
      std::vector<node_t> support;
      std::vector<double> support_w;
      for (node_t v = 0; v < existing; ++v) {
        if (ego[v] > 0.0) {
          support.push_back(v);
          support_w.push_back(ego[v]);
        }
      }
      if (support.empty()) {
        // Nothing reachable under the hop weights: uniform over the other nodes.
        for (node_t v = 0; v < existing; ++v) {
          if (v != anchor) {
            support.push_back(v);
            support_w.push_back(1.0);
          }
        }
      }
      for (auto i : sample_distinct(extra, std::move(support_w), rng)) targets.push_back(support[i]);
      targets.push_back(anchor);
    } else {
      std::size_t count = sample_edge_count(config.edge_count_law, m, std::nullopt, existing, rng);
      for (auto i : sample_distinct(count, std::move(weights), rng)) targets.push_back(candidates[i]);
    }

    g.add_node();
    for (node_t t : targets) g.add_edge(t, v_new);
    candidates.push_back(v_new);
  }

  return {Graph::from_edges(config.n, g.edges()), std::move(labels)};
}

}  // namespace fairbench
