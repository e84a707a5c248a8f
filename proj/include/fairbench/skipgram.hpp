#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/discrete_distribution.hpp>

#include "fairbench/graph.hpp"
#include "fairbench/linalg.hpp"
#include "fairbench/random.hpp"

namespace fairbench {

struct SkipGramParams {
  std::size_t dim = 64;
  std::size_t window = 10;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
};

/// Skip-gram with negative sampling over a node-walk corpus, trained serially
/// (bit-reproducible for a fixed seed). Returns the input vectors, one row
/// per node; nodes absent from the corpus keep zero rows.
inline RowMatrix train_skipgram(const std::vector<std::vector<node_t>>& walks, std::size_t num_nodes,
                                      const SkipGramParams& sp, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(num_nodes);
  const auto d = static_cast<Eigen::Index>(sp.dim);
  RowMatrix in(n, d);
  RowMatrix out = RowMatrix::Zero(n, d);

  std::vector<double> freq(num_nodes, 0.0);
  std::size_t tokens = 0;
  for (const auto& w : walks) {
    for (node_t u : w) freq[u] += 1.0;
    tokens += w.size();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      in(i, j) = freq[i] > 0.0 ? (uniform01(rng) - 0.5) / static_cast<double>(d) : 0.0;
    }
  }
  if (tokens == 0) return in;

  std::vector<double> unigram(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) unigram[i] = std::pow(freq[i], 0.75);
  boost::random::discrete_distribution<node_t, double> noise(unigram.begin(), unigram.end());

  const double total_work = static_cast<double>(tokens * sp.epochs);
  double done = 0.0;
  Eigen::RowVectorXd grad(d);
  for (std::size_t epoch = 0; epoch < sp.epochs; ++epoch) {
    for (const auto& walk : walks) {
      for (std::size_t pos = 0; pos < walk.size(); ++pos, done += 1.0) {
        const double lr = sp.learning_rate * std::max(1e-4, 1.0 - done / total_work);
        const node_t center = walk[pos];
        const std::size_t span = sp.window - uniform_index(rng, sp.window);
        const std::size_t lo = pos >= span ? pos - span : 0;
        const std::size_t hi = std::min(walk.size() - 1, pos + span);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          const node_t ctx = walk[c];
          grad.setZero();
          for (std::size_t s = 0; s <= sp.negatives; ++s) {
            node_t target = center;
            double label = 1.0;
            if (s > 0) {
              target = noise(rng);
              if (target == center) continue;
              label = 0.0;
            }
            const double f = in.row(ctx).dot(out.row(target));
            const double g = (label - 1.0 / (1.0 + std::exp(-f))) * lr;
            grad += g * out.row(target);
            out.row(target) += g * in.row(ctx);
          }
          in.row(ctx) += grad;
        }
      }
    }
  }
  return in;
}

}  // namespace fairbench
