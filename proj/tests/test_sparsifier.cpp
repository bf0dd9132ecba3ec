// Smoothness-sparsifier tests: the bad-edge computation against a masked-BFS
// oracle, the exhaustive verifier against an independent implementation of
// both definition conditions, the randomized constructor's keep rates and
// validity rate, merge/compose/weaken algebra, the deterministic enumerator's
// frozen outcomes, the one-pass merge-and-reduce pipeline, and the
// derandomized micro SSSP run.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "ssp/gen.hpp"
#include "ssp/sparsifier.hpp"

namespace {

using namespace ssp;

WeightedImportanceGraph unit_parent(const Graph& g) {
  return WeightedImportanceGraph(g, std::vector<long double>(g.m(), 1.0L));
}

TEST(ImportanceGraph, ValidatesAlignmentAndPositivity) {
  Graph g(3, {{0, 1, 2}, {1, 2, 3}});
  EXPECT_THROW(WeightedImportanceGraph(g, {1.0L}), invalid_input);
  EXPECT_THROW(WeightedImportanceGraph(g, {1.0L, 0.0L}), invalid_input);
  EXPECT_THROW(WeightedImportanceGraph(g, {1.0L, -2.0L}), invalid_input);
  WeightedImportanceGraph ok(g, {2.0L, 3.0L});
  EXPECT_NEAR(static_cast<double>(ok.total_importance()), 5.0, 1e-12);
}

TEST(BadEdges, MatchesMaskedForestOracle) {
  Graph g(4, {{0, 1, 1}, {0, 2, 5}, {1, 2, 1}, {2, 3, 2}});
  WeightedImportanceGraph parent = unit_parent(g);

  // t = the empty forest: everything incident to a reachable vertex is bad.
  std::vector<Edge> empty_bad = bad_edges(parent, Graph(4, {}), 0);
  ASSERT_EQ(empty_bad.size(), 2u);  // {0,1} and {0,2}; {1,2},{2,3} fully dark
  EXPECT_EQ(empty_bad[0].v, 1u);
  EXPECT_EQ(empty_bad[1].v, 2u);

  // t = {0-1, 1-2}: dist = 0,1,2; edge {0,2} has gap 2 < 5 (good),
  // edge {2,3} one endpoint dark (bad).
  Graph t(4, {{0, 1, 1}, {1, 2, 1}});
  std::vector<Edge> bad = bad_edges(parent, t, 0);
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(bad[0].u, 2u);
  EXPECT_EQ(bad[0].v, 3u);

  // Exhaustive agreement with the oracle on every acyclic subset.
  const std::vector<Edge>& edges = g.edges();
  for (std::uint32_t mask = 0; mask < (1u << edges.size()); ++mask) {
    if (!oracle::mask_acyclic(edges, mask, 4)) continue;
    std::vector<Edge> sub;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (mask >> i & 1u) sub.push_back(edges[i]);
    std::vector<Edge> lib = bad_edges(parent, Graph(4, sub), 0);
    std::vector<Weight> dist =
        oracle::masked_forest_distances(edges, mask, 4, 0);
    std::vector<Edge> expect;
    for (const Edge& e : edges)
      if (oracle::bad_under(dist, e)) expect.push_back(e);
    ASSERT_EQ(lib.size(), expect.size()) << "mask " << mask;
    for (std::size_t i = 0; i < lib.size(); ++i) {
      EXPECT_EQ(lib[i].u, expect[i].u);
      EXPECT_EQ(lib[i].v, expect[i].v);
    }
  }
}

TEST(BadEdges, RejectsBadInputs) {
  Graph g(3, {{0, 1, 2}, {1, 2, 2}, {0, 2, 5}});
  WeightedImportanceGraph parent = unit_parent(g);
  EXPECT_THROW(bad_edges(parent, Graph(4, {}), 0), invalid_input);  // n mismatch
  EXPECT_THROW(bad_edges(parent, Graph(3, {}), 3), invalid_input);  // source
  EXPECT_THROW(bad_edges(parent, Graph(3, {{0, 1, 9}}), 0), invalid_input);
  EXPECT_THROW(bad_edges(parent, g, 0), invalid_input);  // the triangle cycles
}

TEST(Verifier, IdentityPassesAndOverweightFails) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Graph g = random_connected_graph(6, 9, 7, seed);
    std::vector<long double> q;
    for (std::size_t i = 0; i < g.m(); ++i)
      q.push_back(1.0L + static_cast<long double>(prf(seed, TAG_WEIGHT, i, 7) % 5));
    WeightedImportanceGraph parent(g, q);
    SmoothnessSparsifier id = identity_sparsifier(parent, 0.0);
    EXPECT_TRUE(verify_sparsifier(parent, id, 0));

    // Doubling every importance breaks the total-importance budget for any
    // eps below 1.
    SmoothnessSparsifier heavy = id;
    for (long double& v : heavy.importances) v *= 2.0L;
    heavy.eps = 0.5;
    EXPECT_FALSE(verify_sparsifier(parent, heavy, 0));
  }
}

TEST(Verifier, EmptyCandidateBoundary) {
  Graph g(2, {{0, 1, 3}});
  WeightedImportanceGraph parent = unit_parent(g);
  SmoothnessSparsifier empty;
  empty.subgraph = Graph(2, {});
  empty.parent_keys = edge_keys(g);
  // The empty forest makes {0,1} bad with importance 1; coverage needs
  // 0 >= 1 - eps, so eps = 1 passes and anything smaller fails.
  empty.eps = 0.5;
  EXPECT_FALSE(verify_sparsifier(parent, empty, 0));
  empty.eps = 1.0;
  EXPECT_TRUE(verify_sparsifier(parent, empty, 0));
}

TEST(Verifier, RejectsNonSubgraphCandidates) {
  Graph g(3, {{0, 1, 2}, {1, 2, 2}});
  WeightedImportanceGraph parent = unit_parent(g);
  SmoothnessSparsifier cand = identity_sparsifier(parent, 0.0);
  cand.subgraph = Graph(3, {{0, 2, 2}});
  cand.importances = {1.0L};
  EXPECT_THROW(verify_sparsifier(parent, cand, 0), invalid_input);
  cand.subgraph = Graph(3, {{0, 1, 9}});  // right pair, wrong weight
  EXPECT_THROW(verify_sparsifier(parent, cand, 0), invalid_input);
  WeightedImportanceGraph big(random_connected_graph(8, 15, 5, 1),
                              std::vector<long double>(15, 1.0L));
  EXPECT_THROW(SparsifierVerifier(big, 0), invalid_input);  // above 14 edges
  EXPECT_THROW(SparsifierVerifier(parent, 5), invalid_input);
}

TEST(Verifier, AgreesWithIndependentOracle) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Graph g = random_connected_graph(5, 7, 6, seed);
    std::vector<long double> q;
    for (std::size_t i = 0; i < g.m(); ++i)
      q.push_back(0.5L + static_cast<long double>(prf(seed, TAG_WEIGHT, i, 3) % 7));
    WeightedImportanceGraph parent(g, q);
    SparsifierVerifier verifier(parent, 0);

    // Random subset candidates with perturbed importances, across eps values.
    for (std::uint32_t trial = 0; trial < 24; ++trial) {
      std::uint32_t mask = static_cast<std::uint32_t>(
          prf(seed, TAG_GRAPH_GEN, 40 + trial, 0) % (1u << g.m()));
      std::vector<Edge> kept;
      std::vector<long double> kq;
      for (std::size_t i = 0; i < g.m(); ++i) {
        if ((mask >> i & 1u) == 0) continue;
        kept.push_back(g.edges()[i]);
        long double f =
            0.25L + static_cast<long double>(prf(seed, TAG_WEIGHT, trial, i) % 8);
        kq.push_back(q[i] * f / 2.0L);
      }
      SmoothnessSparsifier cand;
      cand.subgraph = Graph(5, kept);
      cand.importances = kq;
      cand.parent_keys = edge_keys(g);
      cand.eps = 0.1 * static_cast<double>(1 + trial % 7);
      EXPECT_EQ(verifier.check(cand),
                oracle::check_smoothness(g.edges(), q, 5, 0, kept, kq,
                                         cand.eps))
          << "seed " << seed << " trial " << trial;
    }
  }
}

TEST(SampleSparsifier, KeepRatesMatchProbabilities) {
  // Parent with one dominant edge: the dominant edge saturates (p = 1) and
  // the light edges land at p = coeff/Q, small enough to measure.
  Graph g = random_connected_graph(6, 10, 9, 4);
  std::vector<long double> q(g.m(), 1.0L);
  q[0] = 5000.0L;
  WeightedImportanceGraph parent(g, q);
  const double eps = 0.5;
  const long double big_q = parent.total_importance();
  const long double coeff = 10.0L / (0.5L * 0.5L) * 6.0L * log2l(6.0L);
  const double p_light = static_cast<double>(coeff / big_q);
  ASSERT_LT(p_light, 1.0);

  const std::size_t trials = 2000;
  std::vector<std::size_t> kept_count(g.m(), 0);
  long double total_sum = 0.0L;
  SparsifierVerifier verifier(parent, 0);
  std::size_t valid = 0;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    SmoothnessSparsifier s = sample_sparsifier(parent, eps, seed);
    if (verifier.check(s)) ++valid;
    total_sum += s.total_importance();
    for (std::size_t j = 0; j < s.subgraph.m(); ++j) {
      const Edge& e = s.subgraph.edges()[j];
      for (std::size_t i = 0; i < g.m(); ++i)
        if (g.edges()[i].u == e.u && g.edges()[i].v == e.v) {
          ++kept_count[i];
          // Kept edges are reweighted to q/p.
          long double expect =
              q[i] / std::min(1.0L, coeff * q[i] / big_q);
          EXPECT_NEAR(static_cast<double>(s.importances[j]),
                      static_cast<double>(expect), 1e-9);
        }
    }
  }
  // The heavy edge is always kept; light keep rates match p within 4 sigma.
  EXPECT_EQ(kept_count[0], trials);
  for (std::size_t i = 1; i < g.m(); ++i) {
    double rate = static_cast<double>(kept_count[i]) / trials;
    EXPECT_NEAR(rate, p_light, 4.0 * oracle::proportion_sigma(p_light, trials))
        << "edge " << i;
  }
  // Reweighting keeps the expected total at Q.
  EXPECT_NEAR(static_cast<double>(total_sum / trials / big_q), 1.0, 0.02);
  // Construction validity far above the 99% target at micro scale.
  EXPECT_GE(static_cast<double>(valid) / trials, 0.99);

  EXPECT_THROW(sample_sparsifier(parent, 0.0, 1), invalid_input);
  EXPECT_THROW(sample_sparsifier(parent, 1.0, 1), invalid_input);
}

TEST(Merge, DisjointUnionAndErrors) {
  Graph a(5, {{0, 1, 2}, {1, 2, 3}});
  Graph b(5, {{2, 3, 1}, {3, 4, 4}});
  WeightedImportanceGraph pa(a, {2.0L, 3.0L});
  WeightedImportanceGraph pb(b, {5.0L, 7.0L});
  SmoothnessSparsifier sa = identity_sparsifier(pa, 0.25);
  SmoothnessSparsifier sb = identity_sparsifier(pb, 0.25);
  SmoothnessSparsifier m = merge(sa, sb);
  EXPECT_EQ(m.subgraph.m(), 4u);
  EXPECT_DOUBLE_EQ(m.eps, 0.25);
  EXPECT_TRUE(std::is_sorted(m.parent_keys.begin(), m.parent_keys.end()));
  EXPECT_EQ(m.parent_keys.size(), 4u);
  // Importances follow their edges through the merge.
  Graph u = union_graphs(a, b);
  WeightedImportanceGraph pu(u, {2.0L, 3.0L, 5.0L, 7.0L});
  for (std::size_t i = 0; i < u.m(); ++i) {
    EXPECT_EQ(m.subgraph.edges()[i].u, u.edges()[i].u);
    EXPECT_EQ(m.subgraph.edges()[i].v, u.edges()[i].v);
    EXPECT_EQ(static_cast<double>(m.importances[i]),
              static_cast<double>(pu.importances[i]));
  }
  // Merged identity is the union's identity: verifies at its eps.
  EXPECT_TRUE(verify_sparsifier(pu, m, 0));

  SmoothnessSparsifier wrong_eps = sb;
  wrong_eps.eps = 0.5;
  EXPECT_THROW(merge(sa, wrong_eps), invalid_input);
  EXPECT_THROW(merge(sa, sa), invalid_input);  // shared parent edges
  Graph c(6, {{4, 5, 1}});
  SmoothnessSparsifier sc =
      identity_sparsifier(WeightedImportanceGraph(c, {1.0L}), 0.25);
  EXPECT_THROW(merge(sa, sc), invalid_input);  // vertex-count mismatch
}

TEST(Compose, EpsAlgebra) {
  EXPECT_DOUBLE_EQ(compose_eps(0.1, 0.1), 0.21);
  EXPECT_DOUBLE_EQ(compose_eps(0.0, 0.3), 0.3);
  EXPECT_DOUBLE_EQ(compose_eps(0.5, 0.0), 0.5);
  EXPECT_THROW(compose_eps(-0.1, 0.1), invalid_input);

  Graph g(3, {{0, 1, 2}});
  SmoothnessSparsifier s =
      identity_sparsifier(WeightedImportanceGraph(g, {1.0L}), 0.2);
  SmoothnessSparsifier w = weaken(s, 0.4);
  EXPECT_DOUBLE_EQ(w.eps, 0.4);
  EXPECT_EQ(w.subgraph.m(), 1u);
  EXPECT_THROW(weaken(s, 0.1), invalid_input);
}

TEST(DeterministicEnumerate, TriangleOutcomesAreFrozen) {
  Graph tri(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}});
  WeightedImportanceGraph parent = unit_parent(tri);

  // eps = 0.9: the budget 2.7 covers every bad set, so the first subset in
  // bitmask order (the empty subgraph) qualifies.
  SmoothnessSparsifier loose = deterministic_enumerate(parent, 0.9);
  EXPECT_EQ(loose.subgraph.m(), 0u);
  EXPECT_TRUE(loose.importances.empty());
  EXPECT_DOUBLE_EQ(loose.eps, 0.9);
  EXPECT_TRUE(verify_sparsifier(parent, loose, 0));

  // eps = 0.1: uniform importance 6.3e-4 cannot cover the source constraint,
  // so the enumerator falls back to the identity.
  SmoothnessSparsifier tight = deterministic_enumerate(parent, 0.1);
  EXPECT_EQ(tight.subgraph.m(), 3u);
  ASSERT_EQ(tight.importances.size(), 3u);
  for (long double v : tight.importances)
    EXPECT_DOUBLE_EQ(static_cast<double>(v), 1.0);
  EXPECT_TRUE(verify_sparsifier(parent, tight, 0));

  // Non-default source changes the constraint set: from vertex 1 the empty
  // subgraph's bad set is the edges at vertex 1, still inside the 0.9 budget.
  SmoothnessSparsifier from1 = deterministic_enumerate(parent, 0.9, 1);
  EXPECT_TRUE(verify_sparsifier(parent, from1, 1));
}

TEST(DeterministicEnumerate, DomainErrors) {
  Graph big = random_connected_graph(8, 11, 5, 2);
  WeightedImportanceGraph parent = unit_parent(big);
  EXPECT_THROW(deterministic_enumerate(parent, 0.5), invalid_input);  // 11 > 10
  Graph small(3, {{0, 1, 1}});
  WeightedImportanceGraph p2 = unit_parent(small);
  EXPECT_THROW(deterministic_enumerate(p2, 0.0), invalid_input);
  EXPECT_THROW(deterministic_enumerate(p2, 0.5, 3), invalid_input);
  // Empty parent: the empty sparsifier, no enumeration needed.
  WeightedImportanceGraph empty(Graph(4, {}), {});
  SmoothnessSparsifier s = deterministic_enumerate(empty, 0.5);
  EXPECT_EQ(s.subgraph.m(), 0u);
}

TEST(MicroDispatch, ThresholdSelectsConstruction) {
  // 11..14 edges with threshold above m: identity fallback.
  Graph mid = random_connected_graph(8, 12, 5, 3);
  WeightedImportanceGraph parent = unit_parent(mid);
  SmoothnessSparsifier s = micro_smoothness_sparsifier(parent, 0.5, 0);
  EXPECT_EQ(s.subgraph.m(), 12u);
  EXPECT_TRUE(verify_sparsifier(parent, s, 0));
}

TEST(MergeReduce, SingleSegmentIsExact) {
  Graph g = random_connected_graph(6, 10, 5, 9);
  EdgeStream stream = graph_stream(g);
  MergeReduceStats stats;
  SmoothnessSparsifier out = merge_reduce_stream(stream, 0.5, 1, {}, &stats);
  EXPECT_EQ(stream.passes_consumed(), 1u);
  EXPECT_EQ(stats.segments, 1u);
  EXPECT_EQ(stats.reductions, 0u);
  EXPECT_EQ(stats.high_water, 1u);
  EXPECT_DOUBLE_EQ(stats.final_eps, 0.0);
  ASSERT_EQ(out.subgraph.m(), g.m());
  for (std::size_t i = 0; i < g.m(); ++i) {
    EXPECT_EQ(out.subgraph.edges()[i].u, g.edges()[i].u);
    EXPECT_EQ(out.subgraph.edges()[i].v, g.edges()[i].v);
    EXPECT_DOUBLE_EQ(static_cast<double>(out.importances[i]), 1.0);
  }
}

TEST(MergeReduce, SegmentedRunStaysWithinBounds) {
  Graph g = random_connected_graph(7, 12, 6, 5);
  WeightedImportanceGraph parent = unit_parent(g);

  MergeReduceOptions opts;
  opts.segment_cap = 5;  // 12 edges -> 3 segments
  EdgeStream stream = graph_stream(g);
  MergeReduceStats stats;
  SmoothnessSparsifier out =
      merge_reduce_stream(stream, 0.5, 2, opts, &stats);
  EXPECT_EQ(stream.passes_consumed(), 1u);
  EXPECT_EQ(stats.segments, 3u);
  EXPECT_EQ(stats.reductions, 2u);
  // ceil(log2 3) + 1 = 3.
  EXPECT_LE(stats.high_water, 3u);
  EXPECT_NEAR(stats.eps_per_reduce, 0.5 / (10.0 * std::log2(3.0)), 1e-12);
  EXPECT_LE(stats.final_eps, 0.5);
  EXPECT_DOUBLE_EQ(out.eps, stats.final_eps);
  // The pipeline's output is a genuine sparsifier of the full stream.
  EXPECT_TRUE(verify_sparsifier(parent, out, 0));

  // Powers of two: 4 segments of 3 edges, high water <= log2(4) + 1.
  MergeReduceOptions opts4;
  opts4.segment_cap = 3;
  EdgeStream s4 = graph_stream(g);
  MergeReduceStats st4;
  SmoothnessSparsifier out4 = merge_reduce_stream(s4, 0.5, 2, opts4, &st4);
  EXPECT_EQ(st4.segments, 4u);
  EXPECT_EQ(st4.reductions, 3u);
  EXPECT_LE(st4.high_water, 3u);
  EXPECT_TRUE(verify_sparsifier(parent, out4, 0));
}

TEST(MergeReduce, DuplicatesKeepFirstOccurrence) {
  std::vector<EdgeUpdate> updates = {
      {0, 1, 5, +1}, {1, 2, 3, +1}, {0, 1, 9, +1}, {2, 3, 2, +1}};
  EdgeStream stream =
      EdgeStream::from_updates(4, StreamMode::insertion, std::move(updates));
  SmoothnessSparsifier out = merge_reduce_stream(stream, 0.5, 1);
  ASSERT_EQ(out.subgraph.m(), 3u);
  EXPECT_TRUE(out.subgraph.has_edge(0, 1));
  for (const Edge& e : out.subgraph.edges())
    if (e.u == 0 && e.v == 1) {
      EXPECT_EQ(e.w, 5u);  // first weight wins
    }
}

TEST(MergeReduce, RejectsBadInputs) {
  Graph g = random_connected_graph(5, 6, 4, 1);
  EdgeStream dyn = deletion_stream(g, 0.0, 1);
  EXPECT_THROW(merge_reduce_stream(dyn, 0.5, 1), invalid_input);
  EdgeStream s1 = graph_stream(g);
  EXPECT_THROW(merge_reduce_stream(s1, 0.0, 1), invalid_input);
  EdgeStream s2 = graph_stream(g);
  MergeReduceOptions opts;
  opts.source = 5;
  EXPECT_THROW(merge_reduce_stream(s2, 0.5, 1, opts), invalid_input);
}

TEST(DerandomizedSssp, MicroRatioWithinEps) {
  Graph g = random_connected_graph(8, 12, 50, 6);
  Config cfg;
  cfg.n = 8;
  cfg.eps = 0.5;
  cfg.k = 2;
  SpaceLedger ledger;
  SsspResult res = derandomized_sssp(g, cfg, ledger);
  EXPECT_EQ(res.metrics.rounds, cfg.rounds());
  EXPECT_EQ(res.metrics.q_trace.size(), cfg.rounds());
  EXPECT_LE(approximation_ratio(g, cfg.source, res.tree), 1.0 + cfg.eps);
  EXPECT_TRUE(check_fail_counts(res.metrics.max_fail_count, cfg.eps, cfg.k,
                                cfg.rounds()));
  // No randomness anywhere: a second run is identical.
  SpaceLedger l2;
  SsspResult again = derandomized_sssp(g, cfg, l2);
  EXPECT_TRUE(res.tree == again.tree);

  Graph big = random_connected_graph(8, 13, 50, 6);
  EXPECT_THROW(derandomized_sssp(big, cfg, ledger), invalid_input);
  Config wrong = cfg;
  wrong.n = 9;
  EXPECT_THROW(derandomized_sssp(g, wrong, ledger), invalid_input);
}

}  // namespace
