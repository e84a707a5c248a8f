#pragma once

#include <algorithm>
#include <vector>

#include "fairbench/embedding.hpp"
#include "fairbench/graph.hpp"

namespace fairbench {

/// Top-k lists per node. Inactive nodes (degree 0 in training) get empty lists.
struct RankedRecs {
  std::size_t k = 10;
  std::vector<std::vector<node_t>> lists;
  std::vector<bool> active;

  std::size_t num_nodes() const { return lists.size(); }
};

/// Generic top-k: for each active u, the k best v outside N_train(u) ∪ {u},
/// highest score first, ties by ascending node id.
template <typename ScoreRow>
RankedRecs recommend_topk_with(const Graph& train, std::size_t k, ScoreRow&& score_row) {
  if (k < 1) throw InputError("k must be >= 1");
  const std::size_t n = train.num_nodes();
  RankedRecs recs;
  recs.k = k;
  recs.lists.assign(n, {});
  recs.active.assign(n, false);
  std::vector<double> scores;
  std::vector<node_t> cand;
  for (node_t u = 0; u < n; ++u) {
    if (train.degree(u) == 0) continue;
    recs.active[u] = true;
    score_row(u, scores);
    cand.clear();
    auto nb = train.neighbors(u);
    auto it = nb.begin();
    for (node_t v = 0; v < n; ++v) {
      while (it != nb.end() && *it < v) ++it;
      if (v == u || (it != nb.end() && *it == v)) continue;
      cand.push_back(v);
    }
    auto better = [&](node_t a, node_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); };
    std::size_t take = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(), better);
    recs.lists[u].assign(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return recs;
}

inline RankedRecs recommend_topk(const Embedding& emb, const Graph& train, std::size_t k = 10) {
  Eigen::MatrixXd s = emb.score_matrix();
  return recommend_topk_with(train, k, [&](node_t u, std::vector<double>& row) {
    row.resize(static_cast<std::size_t>(s.cols()));
    for (Eigen::Index v = 0; v < s.cols(); ++v) row[static_cast<std::size_t>(v)] = s(u, v);
  });
}

}  // namespace fairbench
