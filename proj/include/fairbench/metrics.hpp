#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "fairbench/embedding.hpp"
#include "fairbench/graph.hpp"
#include "fairbench/random.hpp"
#include "fairbench/recommend.hpp"

namespace fairbench {

namespace detail {

inline std::uint64_t pair_key(node_t u, node_t v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

/// Test partners per node (both endpoints of every test edge).
inline std::vector<std::vector<node_t>> partners(std::size_t n, std::span<const Edge> test) {
  std::vector<std::vector<node_t>> out(n);
  for (auto [u, v] : test) {
    out[u].push_back(v);
    out[v].push_back(u);
  }
  return out;
}

inline std::unordered_set<std::uint64_t> recommended_pairs(const RankedRecs& recs) {
  std::unordered_set<std::uint64_t> out;
  for (node_t u = 0; u < recs.num_nodes(); ++u) {
    for (node_t v : recs.lists[u]) out.insert(pair_key(u, v));
  }
  return out;
}

/// Mean of per-node scores over active nodes that have at least one test partner.
template <typename NodeScore>
std::optional<double> per_node_mean(const RankedRecs& recs, std::span<const Edge> test, NodeScore&& node_score) {
  auto part = partners(recs.num_nodes(), test);
  double total = 0.0;
  std::size_t count = 0;
  for (node_t u = 0; u < recs.num_nodes(); ++u) {
    if (part[u].empty() || !recs.active[u]) continue;
    std::sort(part[u].begin(), part[u].end());
    total += node_score(recs.lists[u], part[u]);
    ++count;
  }
  if (count == 0) return std::nullopt;
  return total / static_cast<double>(count);
}

}  // namespace detail

/// Fraction of eligible nodes with at least one test partner in their top-k.
inline std::optional<double> hit_at_k(const RankedRecs& recs, std::span<const Edge> test) {
  return detail::per_node_mean(recs, test, [](const std::vector<node_t>& list, const std::vector<node_t>& rel) {
    for (node_t v : list) {
      if (std::binary_search(rel.begin(), rel.end(), v)) return 1.0;
    }
    return 0.0;
  });
}

/// Average precision truncated at k, normalized by min(|relevant|, k).
inline std::optional<double> ap_at_k(const RankedRecs& recs, std::span<const Edge> test) {
  const double k = static_cast<double>(recs.k);
  return detail::per_node_mean(recs, test, [k](const std::vector<node_t>& list, const std::vector<node_t>& rel) {
    double hits = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (std::binary_search(rel.begin(), rel.end(), list[i])) {
        hits += 1.0;
        acc += hits / static_cast<double>(i + 1);
      }
    }
    return acc / std::min(static_cast<double>(rel.size()), k);
  });
}

/// P(pos > neg) + P(tie) / 2 over all positive x negative pairs, via midranks.
inline double auc_from_scores(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw UndefinedMeasure("AUC needs positive and negative scores");
  std::vector<std::pair<double, bool>> all;
  all.reserve(pos.size() + neg.size());
  for (double x : pos) all.emplace_back(x, true);
  for (double x : neg) all.emplace_back(x, false);
  std::sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    double mid = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (all[t].second) rank_sum += mid;
    }
    i = j;
  }
  const double np = static_cast<double>(pos.size()), nn = static_cast<double>(neg.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Uniform non-edges (neither train nor test), sampled with replacement.
inline std::vector<Edge> sample_negative_pairs(const Graph& train, std::span<const Edge> test, std::size_t count,
                                               std::uint64_t seed) {
  const std::size_t n = train.num_nodes();
  std::unordered_set<std::uint64_t> known;
  for (auto [u, v] : train.edges()) known.insert(detail::pair_key(u, v));
  for (auto [u, v] : test) known.insert(detail::pair_key(u, v));
  const double pairs = static_cast<double>(n) * static_cast<double>(n - (n > 0)) / 2.0;
  const double free = pairs - static_cast<double>(known.size());
  if (n < 2 || free < 1.0) throw InputError("graph too dense to sample negative pairs");

  Rng rng(derive_seed(seed, {0xA0CULL}));
  std::vector<Edge> out;
  out.reserve(count);
  if (free / pairs < 0.05) {
    std::vector<Edge> pool;
    for (node_t u = 0; u < n; ++u)
      for (node_t v = u + 1; v < n; ++v)
        if (!known.count(detail::pair_key(u, v))) pool.emplace_back(u, v);
    for (std::size_t i = 0; i < count; ++i) out.push_back(pool[uniform_index(rng, pool.size())]);
    return out;
  }
  while (out.size() < count) {
    auto u = static_cast<node_t>(uniform_index(rng, n));
    auto v = static_cast<node_t>(uniform_index(rng, n));
    if (u == v || known.count(detail::pair_key(u, v))) continue;
    out.emplace_back(std::min(u, v), std::max(u, v));
  }
  return out;
}

inline std::size_t default_negative_samples(std::size_t num_test) { return std::max<std::size_t>(10000, num_test); }

/// AUC of `score(u, v)` with test edges as positives against sampled non-edges.
template <typename ScoreFn>
double auc(ScoreFn&& score, std::span<const Edge> test, const Graph& train, std::size_t negative_samples,
           std::uint64_t seed) {
  if (test.empty()) throw UndefinedMeasure("AUC needs at least one test edge");
  auto neg = sample_negative_pairs(train, test, negative_samples, seed);
  std::vector<double> ps, ns;
  ps.reserve(test.size());
  ns.reserve(neg.size());
  for (auto [u, v] : test) ps.push_back(score(u, v));
  for (auto [u, v] : neg) ns.push_back(score(u, v));
  return auc_from_scores(ps, ns);
}

enum class DyadicKind { kStatisticalParity, kEqualOpportunity };

/// |P(recommended | intra dyad) - P(recommended | inter dyad)|. A dyad counts
/// as recommended if either endpoint lists the other. SP ranges over candidate
/// pairs (not a training edge, at least one active endpoint); EO over test edges.
/// Empty when one dyad class is empty.
inline std::optional<double> dyadic_fairness(const RankedRecs& recs, std::span<const Edge> test, const Graph& train,
                                             const SensitiveLabels& s, DyadicKind kind) {
  auto rec = detail::recommended_pairs(recs);
  double hit[2] = {0, 0}, total[2] = {0, 0};  // [intra, inter]
  auto count = [&](node_t u, node_t v) {
    int inter = s[u] != s[v];
    total[inter] += 1.0;
    hit[inter] += rec.count(detail::pair_key(u, v)) ? 1.0 : 0.0;
  };
  if (kind == DyadicKind::kEqualOpportunity) {
    for (auto [u, v] : test) count(u, v);
  } else {
    const std::size_t n = train.num_nodes();
    for (node_t u = 0; u < n; ++u) {
      auto nb = train.neighbors(u);
      auto it = nb.begin();
      for (node_t v = u + 1; v < n; ++v) {
        while (it != nb.end() && *it < v) ++it;
        if (it != nb.end() && *it == v) continue;
        if (!recs.active[u] && !recs.active[v]) continue;
        count(u, v);
      }
    }
  }
  if (total[0] == 0 || total[1] == 0) return std::nullopt;
  return std::abs(hit[0] / total[0] - hit[1] / total[1]);
}

struct MetricReport {
  std::optional<double> hit_at_k, ap_at_k, auc, sp_at_k, eo_at_k;
  std::size_t k = 10;
  std::size_t test_edges = 0;
  std::vector<std::string> flags;
};

struct EvalOptions {
  std::size_t k = 10;
  std::optional<std::size_t> negative_samples;  // default: max(1e4, |test|)
};

inline MetricReport evaluate(const Embedding& emb, const Graph& train, std::span<const Edge> test,
                             const SensitiveLabels& s, const EvalOptions& opt, std::uint64_t seed) {
  MetricReport r;
  r.k = opt.k;
  r.test_edges = test.size();
  auto recs = recommend_topk(emb, train, opt.k);
  r.hit_at_k = hit_at_k(recs, test);
  r.ap_at_k = ap_at_k(recs, test);
  try {
    r.auc = auc([&](node_t u, node_t v) { return emb.score(u, v); }, test, train,
                opt.negative_samples.value_or(default_negative_samples(test.size())), seed);
  } catch (const std::exception&) {
    r.flags.emplace_back("auc:undefined");
  }
  r.sp_at_k = dyadic_fairness(recs, test, train, s, DyadicKind::kStatisticalParity);
  r.eo_at_k = dyadic_fairness(recs, test, train, s, DyadicKind::kEqualOpportunity);
  if (!r.hit_at_k) r.flags.emplace_back("hit:undefined");
  if (!r.ap_at_k) r.flags.emplace_back("ap:undefined");
  if (!r.sp_at_k) r.flags.emplace_back("sp:undefined");
  if (!r.eo_at_k) r.flags.emplace_back("eo:undefined");
  for (bool a : recs.active) {
    if (!a) {
      r.flags.emplace_back("inactive_nodes_excluded");
      break;
    }
  }
  return r;
}

}  // namespace fairbench
