#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fairbench/graph.hpp"
#include "fairbench/random.hpp"

namespace fairbench {

struct SplitResult {
  Graph train;
  std::vector<Edge> test;  // canonical (u < v), sorted
  std::size_t split_id = 0;
  std::uint64_t seed = 0;
};

/// Uniform random edge partition. The test side gets round((1 - ratio) * m)
/// edges; the training graph keeps all n nodes. Each split_id draws from its
/// own sub-seed of `seed`.
inline SplitResult split_edges(const Graph& g, std::size_t split_id, std::uint64_t seed, double ratio = 0.8) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("train ratio must lie in (0,1)");
  if (g.num_edges() < 5) throw InputError("splitting needs at least 5 edges");
  Rng rng(derive_seed(seed, {0x5B117ULL, split_id}));
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  shuffle(edges.begin(), edges.end(), rng);
  auto n_test = static_cast<std::size_t>(std::floor((1.0 - ratio) * static_cast<double>(edges.size()) + 0.5));

  SplitResult out;
  out.split_id = split_id;
  out.seed = seed;
  out.test.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::sort(out.test.begin(), out.test.end());
  std::vector<Edge> train(edges.begin() + static_cast<std::ptrdiff_t>(n_test), edges.end());
  out.train = Graph::from_edges(g.num_nodes(), train);
  return out;
}

}  // namespace fairbench
