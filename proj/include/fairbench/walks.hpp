#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fairbench/graph.hpp"
#include "fairbench/random.hpp"

namespace fairbench {

enum class WalkModel { kNode2Vec, kFairwalk, kCrossWalk };

struct WalkParams {
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 80;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
};

struct CrossWalkParams {
  double alpha = 0.5;     // mass sent to different-group neighbors
  double exponent = 2.0;  // boundary-score exponent
  std::size_t probe_walks = 10;
  std::size_t probe_length = 5;
};

/// Fraction of different-group nodes visited by `probe_walks` uniform walks
/// of `probe_length` steps from each node. Isolated nodes score 0.
inline std::vector<double> boundary_scores(const Graph& g, const SensitiveLabels& s, const CrossWalkParams& cw,
                                           Rng& rng) {
  std::vector<double> out(g.num_nodes(), 0.0);
  for (node_t v = 0; v < g.num_nodes(); ++v) {
    if (g.degree(v) == 0 || cw.probe_walks == 0 || cw.probe_length == 0) continue;
    std::size_t other = 0, visited = 0;
    for (std::size_t w = 0; w < cw.probe_walks; ++w) {
      node_t cur = v;
      for (std::size_t step = 0; step < cw.probe_length; ++step) {
        auto nb = g.neighbors(cur);
        cur = nb[uniform_index(rng, nb.size())];
        other += s[cur] != s[v];
        ++visited;
      }
    }
    out[v] = static_cast<double>(other) / static_cast<double>(visited);
  }
  return out;
}

/// Transition probabilities from `current`, aligned with g.neighbors(current).
/// `previous` matters only for node2vec with p or q != 1; `boundary` is
/// required for CrossWalk.
inline std::vector<double> walk_step_distribution(const Graph& g, const SensitiveLabels& s, WalkModel model,
                                                  node_t current, std::optional<node_t> previous,
                                                  const WalkParams& wp = {}, const CrossWalkParams& cw = {},
                                                  const std::vector<double>* boundary = nullptr) {
  auto nb = g.neighbors(current);
  if (nb.empty()) throw InputError("walk step from isolated node " + std::to_string(current));
  const std::size_t k = nb.size();
  std::vector<double> p(k, 1.0 / static_cast<double>(k));

  switch (model) {
    case WalkModel::kNode2Vec: {
      if (!previous || (wp.p == 1.0 && wp.q == 1.0)) break;
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        if (nb[i] == *previous) p[i] = 1.0 / wp.p;
        else if (g.has_edge(nb[i], *previous)) p[i] = 1.0;
        else p[i] = 1.0 / wp.q;
        total += p[i];
      }
      for (auto& x : p) x /= total;
      break;
    }
    case WalkModel::kFairwalk: {
      std::size_t cnt[2] = {0, 0};
      for (node_t v : nb) ++cnt[s[v]];
      const double groups = (cnt[0] > 0) + (cnt[1] > 0);
      for (std::size_t i = 0; i < k; ++i) p[i] = 1.0 / (groups * static_cast<double>(cnt[s[nb[i]]]));
      break;
    }
    case WalkModel::kCrossWalk: {
      if (!boundary) throw InputError("CrossWalk needs boundary scores");
      std::vector<bool> cross(k);
      double mass[2] = {0.0, 0.0};  // [same, different]
      std::size_t cnt[2] = {0, 0};
      for (std::size_t i = 0; i < k; ++i) {
        cross[i] = s[nb[i]] != s[current];
        p[i] = std::pow((*boundary)[nb[i]], cw.exponent);
        mass[cross[i]] += p[i];
        ++cnt[cross[i]];
      }
      if (cnt[0] == 0 || cnt[1] == 0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(k));
        break;
      }
      const double share[2] = {1.0 - cw.alpha, cw.alpha};
      for (std::size_t i = 0; i < k; ++i) {
        int side = cross[i];
        p[i] = mass[side] > 0.0 ? share[side] * p[i] / mass[side] : share[side] / static_cast<double>(cnt[side]);
      }
      break;
    }
  }
  return p;
}

namespace detail {

inline std::size_t draw_from(const std::vector<double>& probs, Rng& rng) {
  double u = uniform01(rng), acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

}  // namespace detail

/// Walk corpus: `walks_per_node` rounds, each starting one walk from every
/// non-isolated node in a freshly shuffled order.
inline std::vector<std::vector<node_t>> generate_walks(const Graph& g, const SensitiveLabels& s, WalkModel model,
                                                       const WalkParams& wp, const CrossWalkParams& cw, Rng& rng) {
  std::vector<double> boundary;
  if (model == WalkModel::kCrossWalk) boundary = boundary_scores(g, s, cw, rng);

  const bool second_order = model == WalkModel::kNode2Vec && (wp.p != 1.0 || wp.q != 1.0);
  std::vector<std::vector<double>> first_order(g.num_nodes());
  if (!second_order && model != WalkModel::kNode2Vec) {
    for (node_t u = 0; u < g.num_nodes(); ++u) {
      if (g.degree(u) > 0) first_order[u] = walk_step_distribution(g, s, model, u, std::nullopt, wp, cw, &boundary);
    }
  }

  std::vector<node_t> starts;
  for (node_t u = 0; u < g.num_nodes(); ++u) {
    if (g.degree(u) > 0) starts.push_back(u);
  }
  std::vector<std::vector<node_t>> walks;
  walks.reserve(starts.size() * wp.walks_per_node);
  for (std::size_t round = 0; round < wp.walks_per_node; ++round) {
    shuffle(starts.begin(), starts.end(), rng);
    for (node_t start : starts) {
      std::vector<node_t> walk{start};
      walk.reserve(wp.walk_length);
      while (walk.size() < wp.walk_length) {
        node_t cur = walk.back();
        auto nb = g.neighbors(cur);
        std::size_t idx;
        if (model == WalkModel::kNode2Vec && !second_order) {
          idx = uniform_index(rng, nb.size());
        } else if (second_order) {
          std::optional<node_t> prev;
          if (walk.size() >= 2) prev = walk[walk.size() - 2];
          idx = detail::draw_from(walk_step_distribution(g, s, model, cur, prev, wp, cw), rng);
        } else {
          idx = detail::draw_from(first_order[cur], rng);
        }
        walk.push_back(nb[idx]);
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

}  // namespace fairbench
