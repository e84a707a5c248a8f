#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fairbench/format.hpp"
#include "fairbench/graph.hpp"

namespace fairbench {

// ---------------------------------------------------------------------------
// Node-level measures
// ---------------------------------------------------------------------------

enum class NodeMeasure { kCloseness, kBetweenness, kPrestige, kDegree, kConstraint, kDensity, kHeterogeneity };

/// Values per node plus which nodes take part in group means.
struct NodeValues {
  std::vector<double> values;
  std::vector<bool> included;
  bool restricted = false;  // computed on the largest component only
};

/// Brandes' algorithm; each unordered pair counted once, endpoints excluded.
inline std::vector<double> betweenness_centrality(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> bc(n, 0.0), sigma(n), delta(n);
  std::vector<std::int64_t> dist(n);
  std::vector<std::vector<node_t>> preds(n);
  std::vector<node_t> order, queue;
  order.reserve(n);
  queue.reserve(n);
  for (node_t s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    for (auto& p : preds) p.clear();
    order.clear();
    queue.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    queue.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      node_t v = queue[head];
      order.push_back(v);
      for (node_t w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      node_t w = *it;
      for (node_t v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  for (auto& x : bc) x /= 2.0;
  return bc;
}

/// (n-1) / sum of distances; assumes a connected graph.
inline std::vector<double> closeness_centrality(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> out(n, 0.0);
  for (node_t u = 0; u < n; ++u) {
    auto d = bfs_distances(g, u);
    double total = 0.0;
    for (auto x : d) {
      if (!x.reachable()) throw UndefinedMeasure("closeness needs a connected graph");
      total += x.hops;
    }
    out[u] = total > 0.0 ? static_cast<double>(n - 1) / total : 0.0;
  }
  return out;
}

struct Eigenpair {
  double value = 0.0;
  Eigen::VectorXd vector;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Perron eigenpair of the adjacency matrix by power iteration on A + I
/// (the shift keeps bipartite graphs from oscillating). Unit norm, nonnegative.
inline Eigenpair principal_eigenpair(const Graph& g, double tol = 1e-10, std::size_t max_iter = 10000) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigenpair ep;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(n, 1))));
  Eigen::VectorXd y(n);
  auto apply_adj = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    for (node_t u = 0; u < g.num_nodes(); ++u) {
      double acc = 0.0;
      for (node_t v : g.neighbors(u)) acc += in[v];
      out[u] = acc;
    }
  };
  for (ep.iterations = 1; ep.iterations <= max_iter; ++ep.iterations) {
    apply_adj(x, y);
    y += x;
    double norm = y.norm();
    if (norm == 0.0) break;
    y /= norm;
    double change = (y - x).cwiseAbs().maxCoeff();
    x.swap(y);
    if (change < tol) {
      ep.converged = true;
      break;
    }
  }
  if (x.sum() < 0) x = -x;
  apply_adj(x, y);
  ep.value = x.dot(y);
  ep.vector = std::move(x);
  return ep;
}

inline std::vector<double> prestige(const Graph& g) {
  auto ep = principal_eigenpair(g);
  if (!(ep.value > 0.0)) throw UndefinedMeasure("prestige needs at least one edge");
  std::vector<double> out(g.num_nodes(), 0.0);
  for (node_t u = 0; u < g.num_nodes(); ++u) {
    double acc = 0.0;
    for (node_t v : g.neighbors(u)) acc += ep.vector[v];
    out[u] = acc / ep.value;
  }
  return out;
}

namespace detail {

inline std::size_t count_common(std::span<const node_t> a, std::span<const node_t> b) {
  std::size_t c = 0;
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++c;
      ++i;
      ++j;
    }
  }
  return c;
}

inline NodeValues lift(const Graph& g, const std::vector<node_t>& keep, const std::vector<double>& sub_values,
                       bool restricted) {
  NodeValues out;
  out.values.assign(g.num_nodes(), 0.0);
  out.included.assign(g.num_nodes(), false);
  out.restricted = restricted;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.values[keep[i]] = sub_values[i];
    out.included[keep[i]] = true;
  }
  return out;
}

}  // namespace detail

inline NodeValues node_measure(const Graph& g, const SensitiveLabels& s, NodeMeasure kind) {
  const std::size_t n = g.num_nodes();
  NodeValues out;
  out.values.assign(n, 0.0);
  out.included.assign(n, true);

  switch (kind) {
    case NodeMeasure::kCloseness:
    case NodeMeasure::kBetweenness:
    case NodeMeasure::kPrestige: {
      auto keep = largest_component(g);
      bool restricted = keep.size() != n;
      Graph sub = restricted ? induced_subgraph(g, keep) : g;
      std::vector<double> vals = kind == NodeMeasure::kCloseness     ? closeness_centrality(sub)
                                 : kind == NodeMeasure::kBetweenness ? betweenness_centrality(sub)
                                                                     : prestige(sub);
      return detail::lift(g, keep, vals, restricted);
    }
    case NodeMeasure::kDegree:
      for (node_t u = 0; u < n; ++u) out.values[u] = static_cast<double>(g.degree(u));
      break;
    case NodeMeasure::kConstraint:
      for (node_t u = 0; u < n; ++u) {
        double acc = 0.0;
        for (node_t v : g.neighbors(u)) acc += static_cast<double>(g.degree(v));
        out.values[u] = acc;
      }
      break;
    case NodeMeasure::kDensity:
      for (node_t u = 0; u < n; ++u) {
        const auto k = static_cast<double>(g.degree(u));
        if (k == 0) {
          out.included[u] = false;
          continue;
        }
        // Edges in N(u) ∪ {u}: the k spokes plus each neighbor-neighbor edge once.
        std::size_t twice_inner = 0;
        for (node_t v : g.neighbors(u)) twice_inner += detail::count_common(g.neighbors(u), g.neighbors(v));
        double inside = k + static_cast<double>(twice_inner) / 2.0;
        out.values[u] = 1.0 - inside / ((k + 1.0) * k / 2.0);
      }
      break;
    case NodeMeasure::kHeterogeneity:
      for (node_t u = 0; u < n; ++u) {
        if (g.degree(u) == 0) {
          out.included[u] = false;
          continue;
        }
        double frac = 0.0;
        for (node_t v : g.neighbors(u)) frac += s[v];
        frac /= static_cast<double>(g.degree(u));
        out.values[u] = 1.0 - 2.0 * std::abs(frac - 0.5);
      }
      break;
  }
  return out;
}

/// Normalized group gap: (mean over group 0 - mean over group 1) / global mean,
/// all means over included nodes.
inline double node_disparity(std::span<const double> values, const SensitiveLabels& s,
                             const std::vector<bool>& included) {
  double sum[2] = {0.0, 0.0};
  std::size_t cnt[2] = {0, 0};
  for (std::size_t u = 0; u < values.size(); ++u) {
    if (!included.empty() && !included[u]) continue;
    int grp = s[static_cast<node_t>(u)];
    sum[grp] += values[u];
    ++cnt[grp];
  }
  if (cnt[0] == 0 || cnt[1] == 0) throw UndefinedMeasure("disparity needs both groups represented");
  double global = (sum[0] + sum[1]) / static_cast<double>(cnt[0] + cnt[1]);
  if (global == 0.0) throw UndefinedMeasure("disparity undefined: global mean is zero");
  return (sum[0] / static_cast<double>(cnt[0]) - sum[1] / static_cast<double>(cnt[1])) / global;
}

inline double node_disparity(const NodeValues& nv, const SensitiveLabels& s) {
  return node_disparity(nv.values, s, nv.included);
}

// ---------------------------------------------------------------------------
// Effective resistance
// ---------------------------------------------------------------------------

/// Pairwise effective resistance from the Laplacian pseudo-inverse, built from
/// its eigendecomposition with eigenvalues below 1e-9 discarded.
inline Eigen::MatrixXd effective_resistance(const Graph& g) {
  if (!is_connected(g)) throw UndefinedMeasure("effective resistance needs a connected graph");
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (auto [u, v] : g.edges()) {
    lap(u, v) -= 1.0;
    lap(v, u) -= 1.0;
    lap(u, u) += 1.0;
    lap(v, v) += 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
  Eigen::VectorXd inv = es.eigenvalues().unaryExpr([](double l) { return l > 1e-9 ? 1.0 / l : 0.0; });
  Eigen::MatrixXd pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  Eigen::VectorXd diag = pinv.diagonal();
  Eigen::MatrixXd r = (-2.0 * pinv).colwise() + diag;
  r.rowwise() += diag.transpose();
  r.diagonal().setZero();
  return r;
}

enum class ResistanceVariant { kIsolation, kDiameter, kControl };

/// Per-node strength: total resistance, maximum resistance, or resistance to neighbors.
inline std::vector<double> resistance_strength(const Graph& g, const Eigen::MatrixXd& r, ResistanceVariant variant) {
  std::vector<double> out(g.num_nodes(), 0.0);
  for (node_t u = 0; u < g.num_nodes(); ++u) {
    switch (variant) {
      case ResistanceVariant::kIsolation: out[u] = r.row(u).sum(); break;
      case ResistanceVariant::kDiameter: out[u] = r.row(u).maxCoeff(); break;
      case ResistanceVariant::kControl:
        for (node_t v : g.neighbors(u)) out[u] += r(u, v);
        break;
    }
  }
  return out;
}

/// |group-0 mean - group-1 mean|, unnormalized.
inline double group_gap(std::span<const double> values, const SensitiveLabels& s) {
  double sum[2] = {0.0, 0.0};
  std::size_t cnt[2] = {0, 0};
  for (std::size_t u = 0; u < values.size(); ++u) {
    int grp = s[static_cast<node_t>(u)];
    sum[grp] += values[u];
    ++cnt[grp];
  }
  if (cnt[0] == 0 || cnt[1] == 0) throw UndefinedMeasure("group gap needs both groups represented");
  return std::abs(sum[0] / static_cast<double>(cnt[0]) - sum[1] / static_cast<double>(cnt[1]));
}

inline double er_group_gap(const Graph& g, const SensitiveLabels& s, ResistanceVariant variant) {
  auto r = effective_resistance(g);
  return group_gap(resistance_strength(g, r, variant), s);
}

// ---------------------------------------------------------------------------
// Graph-level measures
// ---------------------------------------------------------------------------

/// Newman attribute assortativity over the 2x2 mixing matrix.
inline double assortativity(const Graph& g, const SensitiveLabels& s) {
  if (g.num_edges() == 0) throw UndefinedMeasure("assortativity needs at least one edge");
  double e[2][2] = {{0, 0}, {0, 0}};
  const double unit = 1.0 / static_cast<double>(g.num_edges());
  for (auto [u, v] : g.edges()) {
    int a = s[u], b = s[v];
    if (a == b) {
      e[a][a] += unit;
    } else {
      e[0][1] += unit / 2.0;
      e[1][0] += unit / 2.0;
    }
  }
  double trace = e[0][0] + e[1][1];
  double ab = 0.0;
  for (int i = 0; i < 2; ++i) ab += (e[i][0] + e[i][1]) * (e[0][i] + e[1][i]);
  if (1.0 - ab <= 1e-15) {
    if (e[0][1] == 0.0) return 1.0;
    throw UndefinedMeasure("assortativity undefined for this mixing matrix");
  }
  return (trace - ab) / (1.0 - ab);
}

/// Mean shortest-path length over all cross-group pairs; assumes connectivity.
inline double avg_mixed_dist(const Graph& g, const SensitiveLabels& s) {
  if (s.count(0) == 0 || s.count(1) == 0) throw UndefinedMeasure("avg mixed distance needs both groups");
  int src_group = s.count(0) <= s.count(1) ? 0 : 1;
  double total = 0.0;
  for (node_t u = 0; u < g.num_nodes(); ++u) {
    if (s[u] != src_group) continue;
    auto d = bfs_distances(g, u);
    for (node_t v = 0; v < g.num_nodes(); ++v) {
      if (s[v] == src_group) continue;
      if (!d[v].reachable()) throw UndefinedMeasure("avg mixed distance needs a connected graph");
      total += d[v].hops;
    }
  }
  return total / (static_cast<double>(s.count(0)) * static_cast<double>(s.count(1)));
}

/// Discrete power-law MLE exponent with d_min = 1: 1 + n [sum ln(d / 0.5)]^-1.
inline double power_law_exponent(std::span<const double> degrees) {
  double acc = 0.0;
  for (double d : degrees) acc += std::log(d / 0.5);
  return 1.0 + static_cast<double>(degrees.size()) / acc;
}

/// kappa_1 / kappa_0 over nodes of positive degree.
inline double power_exp_ratio(const Graph& g, const SensitiveLabels& s) {
  std::vector<double> deg[2];
  for (node_t u = 0; u < g.num_nodes(); ++u) {
    if (g.degree(u) > 0) deg[s[u]].push_back(static_cast<double>(g.degree(u)));
  }
  for (int grp = 0; grp < 2; ++grp) {
    if (deg[grp].size() < 10) {
      throw UndefinedMeasure("power exponent needs >= 10 connected nodes in group " + std::to_string(grp));
    }
    if (std::all_of(deg[grp].begin(), deg[grp].end(), [](double d) { return d == 1.0; })) {
      throw UndefinedMeasure("power exponent degenerate: all degrees equal 1 in group " + std::to_string(grp));
    }
  }
  return power_law_exponent(deg[1]) / power_law_exponent(deg[0]);
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw UndefinedMeasure("KS statistic needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() || j < b.size()) {
    double x = (j == b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

/// Flow matrix: average of the first `steps` powers of the random-walk transition matrix.
inline Eigen::MatrixXd walk_flow_matrix(const Graph& g, int steps) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * g.num_edges());
  for (node_t u = 0; u < g.num_nodes(); ++u) {
    if (g.degree(u) == 0) throw UndefinedMeasure("random-walk flow needs every node to have a neighbor");
    double p = 1.0 / static_cast<double>(g.degree(u));
    for (node_t v : g.neighbors(u)) trip.emplace_back(u, v, p);
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> trans(n, n);
  trans.setFromTriplets(trip.begin(), trip.end());
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  for (int t = 1; t <= steps; ++t) {
    power = trans * power;
    acc += power;
  }
  return acc / static_cast<double>(steps);
}

/// Largest pairwise KS distance among the within-0, within-1 and 0-to-1 flow distributions.
inline double info_unfairness(const Graph& g, const SensitiveLabels& s, int steps = 5) {
  if (s.count(0) == 0 || s.count(1) == 0) throw UndefinedMeasure("information unfairness needs both groups");
  if (!is_connected(g)) throw UndefinedMeasure("information unfairness needs a connected graph");
  auto flow = walk_flow_matrix(g, steps);
  std::vector<double> d00, d11, d01;
  for (node_t u = 0; u < g.num_nodes(); ++u) {
    for (node_t v = 0; v < g.num_nodes(); ++v) {
      if (u == v) continue;
      // Snap so that flows equal up to rounding compare as ties.
      double a = std::round(flow(u, v) * 1e12) / 1e12;
      if (s[u] == 0 && s[v] == 0) d00.push_back(a);
      else if (s[u] == 1 && s[v] == 1) d11.push_back(a);
      else if (s[u] == 0) d01.push_back(a);
    }
  }
  if (d00.empty() || d11.empty()) throw UndefinedMeasure("information unfairness needs two nodes per group");
  return std::max({ks_statistic(d00, d01), ks_statistic(d00, d11), ks_statistic(d11, d01)});
}

// ---------------------------------------------------------------------------
// Profile
// ---------------------------------------------------------------------------

enum class Measure {
  kCloseness,
  kBetweenness,
  kPrestige,
  kDegree,
  kConstraint,
  kDensity,
  kHeterogeneity,
  kIsolation,
  kDiameter,
  kControl,
  kAssortativity,
  kAvgMixedDist,
  kPowerExp,
  kInfoUnfairness,
};

inline constexpr std::size_t kNumMeasures = 14;

inline constexpr std::array<std::string_view, kNumMeasures> kMeasureNames = {
    "closeness", "betweenness", "prestige",  "degree",        "constraint",     "density",   "heterogeneity",
    "isolation", "diameter",    "control",   "assortativity", "avg_mixed_dist", "power_exp", "info_unfairness"};

/// One value per structural bias measure; undefined entries are empty and
/// explained in `flags`.
struct BiasProfile {
  std::array<std::optional<double>, kNumMeasures> values{};
  std::vector<std::string> flags;

  std::optional<double>& operator[](Measure m) { return values[static_cast<std::size_t>(m)]; }
  const std::optional<double>& operator[](Measure m) const { return values[static_cast<std::size_t>(m)]; }

  static std::string csv_header() {
    std::string h;
    for (auto name : kMeasureNames) {
      h += name;
      h += ',';
    }
    return h + "flags";
  }

  /// Columns in kMeasureNames order, then ';'-joined flags.
  std::string csv_row() const {
    std::string row;
    for (const auto& v : values) {
      row += format_optional(v);
      row += ',';
    }
    return row + join(flags, ";");
  }

  bool operator==(const BiasProfile&) const = default;
};

struct ProfileOptions {
  int info_steps = 5;
};

inline BiasProfile bias_profile(const Graph& g, const SensitiveLabels& s, const ProfileOptions& opt = {}) {
  BiasProfile p;
  auto attempt = [&](Measure m, auto&& fn) {
    try {
      p[m] = fn();
    } catch (const UndefinedMeasure& e) {
      p.flags.push_back(std::string(kMeasureNames[static_cast<std::size_t>(m)]) + ":undefined");
    }
  };

  static constexpr std::pair<Measure, NodeMeasure> kNodeKinds[] = {
      {Measure::kCloseness, NodeMeasure::kCloseness},     {Measure::kBetweenness, NodeMeasure::kBetweenness},
      {Measure::kPrestige, NodeMeasure::kPrestige},       {Measure::kDegree, NodeMeasure::kDegree},
      {Measure::kConstraint, NodeMeasure::kConstraint},   {Measure::kDensity, NodeMeasure::kDensity},
      {Measure::kHeterogeneity, NodeMeasure::kHeterogeneity}};
  bool excluded_isolated = false;
  for (auto [m, kind] : kNodeKinds) {
    attempt(m, [&] {
      auto nv = node_measure(g, s, kind);
      if (kind == NodeMeasure::kDensity || kind == NodeMeasure::kHeterogeneity) {
        excluded_isolated |= std::find(nv.included.begin(), nv.included.end(), false) != nv.included.end();
      }
      return node_disparity(nv, s);
    });
  }
  if (excluded_isolated) p.flags.emplace_back("isolated_excluded");

  // Path- and flow-based measures use the largest component.
  auto keep = largest_component(g);
  const bool restricted = keep.size() != g.num_nodes();
  Graph sub = restricted ? induced_subgraph(g, keep) : Graph{};
  const Graph& cg = restricted ? sub : g;
  SensitiveLabels cs = s;
  if (restricted) {
    std::vector<std::uint8_t> t;
    for (node_t u : keep) t.push_back(s[u]);
    cs = SensitiveLabels(std::move(t));
    p.flags.emplace_back("restricted_lcc");
  }

  std::optional<Eigen::MatrixXd> resistance;
  try {
    if (cg.num_nodes() >= 2) resistance = effective_resistance(cg);
  } catch (const UndefinedMeasure&) {
  }
  static constexpr std::pair<Measure, ResistanceVariant> kResistanceKinds[] = {
      {Measure::kIsolation, ResistanceVariant::kIsolation},
      {Measure::kDiameter, ResistanceVariant::kDiameter},
      {Measure::kControl, ResistanceVariant::kControl}};
  for (auto [m, variant] : kResistanceKinds) {
    attempt(m, [&] {
      if (!resistance) throw UndefinedMeasure("no resistance matrix");
      return group_gap(resistance_strength(cg, *resistance, variant), cs);
    });
  }

  attempt(Measure::kAssortativity, [&] { return assortativity(g, s); });
  attempt(Measure::kAvgMixedDist, [&] { return avg_mixed_dist(cg, cs); });
  attempt(Measure::kPowerExp, [&] { return power_exp_ratio(g, s); });
  attempt(Measure::kInfoUnfairness, [&] { return info_unfairness(cg, cs, opt.info_steps); });
  return p;
}

}  // namespace fairbench
