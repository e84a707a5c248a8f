#include <gtest/gtest.h>

#include <numeric>

#include "fairbench/embedding.hpp"
#include "fairbench/metrics.hpp"
#include "fairbench/split.hpp"
#include "test_util.hpp"

using namespace fairbench;

namespace {

RankedRecs make_recs(std::size_t k, std::vector<std::vector<node_t>> lists) {
  RankedRecs r;
  r.k = k;
  r.active.assign(lists.size(), true);
  r.lists = std::move(lists);
  return r;
}

double brute_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double acc = 0.0;
  for (double p : pos)
    for (double q : neg) acc += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
  return acc / static_cast<double>(pos.size() * neg.size());
}

}  // namespace

TEST(Hit, Examples) {
  std::vector<Edge> test{{0, 1}, {2, 3}};
  EXPECT_DOUBLE_EQ(*hit_at_k(make_recs(2, {{1, 2}, {0}, {3}, {2}}), test), 1.0);
  EXPECT_DOUBLE_EQ(*hit_at_k(make_recs(2, {{2}, {2}, {0}, {0}}), test), 0.0);

  // Eligible nodes are 0 and 1 only; 0 hits, 1 misses.
  std::vector<Edge> one{{0, 1}};
  EXPECT_DOUBLE_EQ(*hit_at_k(make_recs(2, {{1}, {2}, {}, {}}), one), 0.5);
}

TEST(Hit, UndefinedWithoutEligibleNodes) {
  std::vector<Edge> none;
  EXPECT_FALSE(hit_at_k(make_recs(2, {{1}, {0}}), none).has_value());
  auto recs = make_recs(2, {{1}, {0}});
  recs.active = {false, false};
  std::vector<Edge> one{{0, 1}};
  EXPECT_FALSE(hit_at_k(recs, one).has_value());
}

TEST(Ap, Examples) {
  std::vector<Edge> test{{0, 1}};
  auto first = make_recs(10, {{1, 2, 3}, {}, {}, {}});
  first.active = {true, false, false, false};
  EXPECT_DOUBLE_EQ(*ap_at_k(first, test), 1.0);

  auto second = make_recs(10, {{2, 1, 3}, {}, {}, {}});
  second.active = {true, false, false, false};
  EXPECT_DOUBLE_EQ(*ap_at_k(second, test), 0.5);

  auto absent = make_recs(10, {{2, 3}, {}, {}, {}});
  absent.active = {true, false, false, false};
  EXPECT_DOUBLE_EQ(*ap_at_k(absent, test), 0.0);
}

TEST(Ap, MultipleRelevantByHand) {
  // Partners {1, 3}; list [1, 2, 3]: precision 1 at rank 1, 2/3 at rank 3.
  std::vector<Edge> test{{0, 1}, {0, 3}};
  auto recs = make_recs(3, {{1, 2, 3}, {}, {}, {}});
  recs.active = {true, false, false, false};
  EXPECT_NEAR(*ap_at_k(recs, test), (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
}

TEST(Ap, NeverExceedsHit) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20;
    std::vector<std::vector<node_t>> lists(n);
    for (node_t u = 0; u < n; ++u) {
      std::vector<node_t> c;
      for (node_t v = 0; v < n; ++v)
        if (v != u) c.push_back(v);
      shuffle(c.begin(), c.end(), rng);
      c.resize(5);
      lists[u] = c;
    }
    std::vector<Edge> test;
    for (int i = 0; i < 15; ++i) {
      auto u = static_cast<node_t>(uniform_index(rng, n)), v = static_cast<node_t>(uniform_index(rng, n));
      if (u != v) test.emplace_back(std::min(u, v), std::max(u, v));
    }
    auto recs = make_recs(5, lists);
    auto h = hit_at_k(recs, test), a = ap_at_k(recs, test);
    ASSERT_TRUE(h && a);
    EXPECT_LE(*a, *h + 1e-15);
    EXPECT_GE(*a, 0.0);
    EXPECT_LE(*h, 1.0);
  }
}

TEST(Auc, PerfectAndConstant) {
  std::vector<double> pos{1, 1, 1}, neg{0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(auc_from_scores(pos, neg), 1.0);
  std::vector<double> c1(5, 0.3), c2(9, 0.3);
  EXPECT_EQ(auc_from_scores(c1, c2), 0.5);
}

TEST(Auc, MatchesPairCountingWithTies) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> pos(1 + uniform_index(rng, 40)), neg(1 + uniform_index(rng, 40));
    for (auto& x : pos) x = static_cast<double>(uniform_index(rng, 5));
    for (auto& x : neg) x = static_cast<double>(uniform_index(rng, 5));
    EXPECT_NEAR(auc_from_scores(pos, neg), brute_auc(pos, neg), 1e-12);
  }
}

TEST(Auc, RandomScoresNearHalf) {
  Rng rng(2024);
  std::vector<double> pos(5000), neg(10000);
  for (auto& x : pos) x = uniform01(rng);
  for (auto& x : neg) x = uniform01(rng);
  EXPECT_NEAR(auc_from_scores(pos, neg), 0.5, 0.02);
}

TEST(Auc, MonotoneTransformInvariant) {
  Rng rng(8);
  std::vector<double> pos(200), neg(300);
  for (auto& x : pos) x = uniform01(rng) + 0.2;
  for (auto& x : neg) x = uniform01(rng);
  double base = auc_from_scores(pos, neg);
  auto tp = pos, tn = neg;
  for (auto& x : tp) x = std::exp(3 * x) - 7;
  for (auto& x : tn) x = std::exp(3 * x) - 7;
  EXPECT_DOUBLE_EQ(auc_from_scores(tp, tn), base);
}

TEST(Auc, NegativesAvoidKnownPairs) {
  auto g = test::random_graph(30, 0.2, 1);
  auto sp = split_edges(g, 0, 1);
  auto neg = sample_negative_pairs(sp.train, sp.test, 2000, 5);
  EXPECT_EQ(neg.size(), 2000u);
  for (auto [u, v] : neg) {
    EXPECT_LT(u, v);
    EXPECT_FALSE(g.has_edge(u, v));
  }
  EXPECT_EQ(neg, sample_negative_pairs(sp.train, sp.test, 2000, 5));
}

TEST(Auc, NearlyCompleteGraphEnumerates) {
  auto full = test::complete_graph(12);
  std::vector<Edge> e(full.edges().begin(), full.edges().end());
  e.erase(e.begin() + 3);
  auto g = Graph::from_edges(12, e);
  std::vector<Edge> test{e[0]};
  auto neg = sample_negative_pairs(g, test, 10, 1);
  for (auto p : neg) EXPECT_EQ(p, full.edges()[3]);
  std::vector<Edge> rest(e.begin() + 1, e.end());
  auto train = Graph::from_edges(12, rest);
  std::vector<Edge> test_all{e[0], full.edges()[3]};
  EXPECT_THROW(sample_negative_pairs(train, test_all, 10, 1), InputError);
}

TEST(Auc, ScoreFunctionAgainstLabels) {
  auto g = test::random_graph(40, 0.1, 2);
  auto sp = split_edges(g, 0, 2);
  auto oracle = [&](node_t u, node_t v) { return g.has_edge(u, v) ? 1.0 : 0.0; };
  EXPECT_DOUBLE_EQ(auc(oracle, sp.test, sp.train, 5000, 1), 1.0);
}

TEST(Dyadic, StatisticalParityByHand) {
  // Candidates: intra (0,1), (2,3); inter (0,3), (1,2). Only intra recommended.
  auto train = Graph::from_edges(4, {{0, 2}, {1, 3}});
  SensitiveLabels s({0, 0, 1, 1});
  auto recs = make_recs(1, {{1}, {}, {3}, {}});
  std::vector<Edge> test{{0, 1}, {0, 3}};
  EXPECT_DOUBLE_EQ(*dyadic_fairness(recs, test, train, s, DyadicKind::kStatisticalParity), 1.0);
  EXPECT_DOUBLE_EQ(*dyadic_fairness(recs, test, train, s, DyadicKind::kEqualOpportunity), 1.0);

  auto both = make_recs(2, {{1, 3}, {}, {}, {}});
  EXPECT_DOUBLE_EQ(*dyadic_fairness(both, test, train, s, DyadicKind::kEqualOpportunity), 0.0);
}

TEST(Dyadic, EmptyClassIsUndefined) {
  auto train = Graph::from_edges(3, {{0, 1}});
  SensitiveLabels s({0, 0, 0});
  auto recs = make_recs(1, {{2}, {2}, {0}});
  std::vector<Edge> test{{0, 2}};
  EXPECT_FALSE(dyadic_fairness(recs, test, train, s, DyadicKind::kStatisticalParity).has_value());
  EXPECT_FALSE(dyadic_fairness(recs, test, train, s, DyadicKind::kEqualOpportunity).has_value());
}

TEST(Dyadic, LabelSwapInvariant) {
  Rng rng(4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = test::random_connected_graph(40, 0.1, seed);
    auto sp = split_edges(g, 0, seed);
    std::vector<std::uint8_t> lab(40);
    for (auto& x : lab) x = static_cast<std::uint8_t>(uniform_index(rng, 2));
    SensitiveLabels s(lab);
    ModelSpec spec;
    spec.dim = 8;
    auto emb = embed(sp.train, s, spec, seed);
    auto recs = recommend_topk(emb, sp.train, 5);
    for (auto kind : {DyadicKind::kStatisticalParity, DyadicKind::kEqualOpportunity}) {
      auto a = dyadic_fairness(recs, sp.test, sp.train, s, kind);
      auto b = dyadic_fairness(recs, sp.test, sp.train, s.swapped(), kind);
      ASSERT_EQ(a.has_value(), b.has_value());
      if (a) {
        EXPECT_EQ(*a, *b);
        EXPECT_GE(*a, 0.0);
        EXPECT_LE(*a, 1.0);
      }
    }
  }
}

TEST(Metrics, PermutationEquivariant) {
  auto g = test::random_connected_graph(30, 0.12, 6);
  auto sp = split_edges(g, 0, 6);
  std::vector<std::uint8_t> lab(30);
  for (std::size_t i = 0; i < 30; ++i) lab[i] = i % 3 == 0;
  SensitiveLabels s(lab);
  ModelSpec spec;
  spec.dim = 6;
  auto recs = recommend_topk(embed(sp.train, s, spec, 1), sp.train, 5);

  std::vector<node_t> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(6);
  shuffle(perm.begin(), perm.end(), rng);
  auto map_edges = [&](std::span<const Edge> es) {
    std::vector<Edge> out;
    for (auto [u, v] : es) out.emplace_back(std::min(perm[u], perm[v]), std::max(perm[u], perm[v]));
    return out;
  };
  auto ptrain = Graph::from_edges(30, map_edges(sp.train.edges()));
  auto ptest = map_edges(sp.test);
  std::vector<std::uint8_t> plab(30);
  RankedRecs precs;
  precs.k = recs.k;
  precs.lists.resize(30);
  precs.active.resize(30);
  for (node_t u = 0; u < 30; ++u) {
    plab[perm[u]] = lab[u];
    precs.active[perm[u]] = recs.active[u];
    for (node_t v : recs.lists[u]) precs.lists[perm[u]].push_back(perm[v]);
  }
  SensitiveLabels ps(plab);
  EXPECT_NEAR(*hit_at_k(recs, sp.test), *hit_at_k(precs, ptest), 1e-12);
  EXPECT_NEAR(*ap_at_k(recs, sp.test), *ap_at_k(precs, ptest), 1e-12);
  for (auto kind : {DyadicKind::kStatisticalParity, DyadicKind::kEqualOpportunity})
    EXPECT_NEAR(*dyadic_fairness(recs, sp.test, sp.train, s, kind),
                *dyadic_fairness(precs, ptest, ptrain, ps, kind), 1e-12);
}

TEST(Evaluate, ReportWithinBounds) {
  auto g = test::random_connected_graph(60, 0.08, 9);
  auto sp = split_edges(g, 0, 9);
  std::vector<std::uint8_t> lab(60);
  for (std::size_t i = 0; i < 60; ++i) lab[i] = i % 2;
  SensitiveLabels s(lab);
  ModelSpec spec;
  spec.dim = 16;
  auto emb = embed(sp.train, s, spec, 3);
  EvalOptions opt;
  opt.negative_samples = 2000;
  auto r = evaluate(emb, sp.train, sp.test, s, opt, 3);
  for (auto v : {r.hit_at_k, r.ap_at_k, r.auc, r.sp_at_k, r.eo_at_k}) {
    ASSERT_TRUE(v.has_value());
    EXPECT_GE(*v, 0.0);
    EXPECT_LE(*v, 1.0);
  }
  EXPECT_LE(*r.ap_at_k, *r.hit_at_k);
  EXPECT_EQ(r.test_edges, sp.test.size());
  auto again = evaluate(emb, sp.train, sp.test, s, opt, 3);
  EXPECT_EQ(r.auc, again.auc);
}
