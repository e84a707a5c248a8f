#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fairbench/format.hpp"
#include "fairbench/graph.hpp"
#include "fairbench/linalg.hpp"
#include "fairbench/random.hpp"
#include "fairbench/skipgram.hpp"
#include "fairbench/walks.hpp"

namespace fairbench {

enum class ModelKind { kSvd, kNmf, kNode2Vec, kFairwalk, kCrossWalk };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kSvd: return "svd";
    case ModelKind::kNmf: return "nmf";
    case ModelKind::kNode2Vec: return "n2v";
    case ModelKind::kFairwalk: return "fairwalk";
    case ModelKind::kCrossWalk: return "crosswalk";
  }
  return "?";
}

inline ModelKind parse_model(const std::string& s) {
  for (auto k : {ModelKind::kSvd, ModelKind::kNmf, ModelKind::kNode2Vec, ModelKind::kFairwalk, ModelKind::kCrossWalk}) {
    if (to_string(k) == s) return k;
  }
  throw InputError("unknown model '" + s + "' (expected svd | nmf | n2v | fairwalk | crosswalk)");
}

struct NmfParams {
  std::size_t max_iter = 200;
  double tolerance = 1e-4;  // relative change of the reconstruction error
};

struct ModelSpec {
  ModelKind kind = ModelKind::kSvd;
  std::size_t dim = 64;
  WalkParams walk;
  SkipGramParams skipgram;  // dim is taken from `dim`
  CrossWalkParams crosswalk;
  NmfParams nmf;
};

/// Node representations plus the pair-scoring rule score(u,v) = <left_u, right_v>.
/// For symmetric models right is empty and the rule is <left_u, left_v>.
struct Embedding {
  RowMatrix left;
  std::optional<RowMatrix> right;
  ModelKind model = ModelKind::kSvd;
  std::vector<std::string> diagnostics;

  std::size_t num_nodes() const { return static_cast<std::size_t>(left.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(left.cols()); }
  const RowMatrix& context() const { return right ? *right : left; }
  double score(node_t u, node_t v) const { return left.row(u).dot(context().row(v)); }
  /// Full n x n score matrix.
  Eigen::MatrixXd score_matrix() const { return left * context().transpose(); }
};

namespace detail {

inline void zero_isolated(const Graph& g, RowMatrix& m) {
  for (node_t u = 0; u < g.num_nodes(); ++u) {
    if (g.degree(u) == 0) m.row(u).setZero();
  }
}

}  // namespace detail

/// Rank-d truncated SVD of the adjacency matrix, left = U S^1/2, right = V S^1/2.
/// The adjacency is symmetric, so singular pairs come from its eigenpairs
/// ordered by |lambda| (ties by index).
inline Embedding svd_embedding(const Graph& g, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  for (auto [u, v] : g.edges()) adj(u, v) = adj(v, u) = 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(adj);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
  });
  const auto d = static_cast<Eigen::Index>(std::min<std::size_t>(dim, g.num_nodes()));
  Embedding e;
  e.model = ModelKind::kSvd;
  e.left = RowMatrix::Zero(n, d);
  RowMatrix right = RowMatrix::Zero(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double lambda = es.eigenvalues()[order[static_cast<std::size_t>(j)]];
    double root = std::sqrt(std::abs(lambda));
    auto vec = es.eigenvectors().col(order[static_cast<std::size_t>(j)]);
    e.left.col(j) = vec * root;
    right.col(j) = vec * (lambda < 0 ? -root : root);
  }
  detail::zero_isolated(g, e.left);
  detail::zero_isolated(g, right);
  e.right = std::move(right);
  return e;
}

/// Rank-d NMF of D^-1/2 A D^-1/2 by Lee-Seung multiplicative updates; the
/// embedding is the left factor W.
inline Embedding nmf_embedding(const Graph& g, std::size_t dim, const NmfParams& np, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const auto d = static_cast<Eigen::Index>(dim);
  std::vector<Eigen::Triplet<double>> trip;
  for (auto [u, v] : g.edges()) {
    double w = 1.0 / std::sqrt(static_cast<double>(g.degree(u)) * static_cast<double>(g.degree(v)));
    trip.emplace_back(u, v, w);
    trip.emplace_back(v, u, w);
  }
  Eigen::SparseMatrix<double> x(n, n);
  x.setFromTriplets(trip.begin(), trip.end());
  const double x_norm2 = x.squaredNorm();

  Eigen::MatrixXd w(n, d), h(d, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) w(i, j) = uniform01(rng);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < n; ++j) h(i, j) = uniform01(rng);

  constexpr double eps = 1e-12;
  auto error2 = [&] {
    Eigen::MatrixXd xht = x * h.transpose();
    double cross = (w.array() * xht.array()).sum();
    double quad = ((w.transpose() * w).array() * (h * h.transpose()).array()).sum();
    return std::max(0.0, x_norm2 - 2.0 * cross + quad);
  };

  Embedding e;
  e.model = ModelKind::kNmf;
  double prev = error2();
  bool converged = false;
  std::size_t it = 0;
  for (it = 1; it <= np.max_iter; ++it) {
    Eigen::MatrixXd wt_x = (x.transpose() * w).transpose();
    Eigen::MatrixXd wtw_h = (w.transpose() * w) * h;
    h.array() *= wt_x.array() / (wtw_h.array() + eps);
    Eigen::MatrixXd x_ht = x * h.transpose();
    Eigen::MatrixXd w_hht = w * (h * h.transpose());
    w.array() *= x_ht.array() / (w_hht.array() + eps);
    double cur = error2();
    if (std::abs(prev - cur) <= np.tolerance * std::max(prev, eps)) {
      converged = true;
      break;
    }
    prev = cur;
  }
  if (!converged) {
    e.diagnostics.push_back("nmf:not_converged_after_" + std::to_string(np.max_iter));
  }
  e.left = w;
  detail::zero_isolated(g, e.left);
  return e;
}

inline WalkModel walk_model_of(ModelKind k) {
  switch (k) {
    case ModelKind::kFairwalk: return WalkModel::kFairwalk;
    case ModelKind::kCrossWalk: return WalkModel::kCrossWalk;
    default: return WalkModel::kNode2Vec;
  }
}

/// Trains `spec` on the training graph. Degree-0 nodes always get zero rows.
inline Embedding embed(const Graph& train, const SensitiveLabels& s, const ModelSpec& spec, std::uint64_t seed) {
  if (train.num_nodes() == 0) throw InputError("cannot embed an empty graph");
  if (spec.dim < 2) throw InputError("embedding dimension must be >= 2");
  Rng rng(seed);
  switch (spec.kind) {
    case ModelKind::kSvd: return svd_embedding(train, spec.dim);
    case ModelKind::kNmf: return nmf_embedding(train, spec.dim, spec.nmf, rng);
    default: break;
  }
  auto walks = generate_walks(train, s, walk_model_of(spec.kind), spec.walk, spec.crosswalk, rng);
  SkipGramParams sg = spec.skipgram;
  sg.dim = spec.dim;
  Embedding e;
  e.model = spec.kind;
  e.left = train_skipgram(walks, train.num_nodes(), sg, rng);
  detail::zero_isolated(train, e.left);
  if (!e.left.allFinite()) e.diagnostics.push_back(to_string(spec.kind) + ":non_finite_embedding");
  return e;
}

}  // namespace fairbench
