// Dynamic-stream tests: signed importance accumulation with deletions, the
// sampler-bank round (saturation, net-multiplicity validation, the rescale
// path for exploding importances), pass accounting at 2 per round, and
// end-to-end distances checked against Bellman-Ford on the final graph.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "ssp/dynamic.hpp"
#include "ssp/gen.hpp"

namespace {

using namespace ssp;

TEST(Dynamic, PairCount) {
  EXPECT_EQ(pair_count(2), 1u);
  EXPECT_EQ(pair_count(5), 10u);
  EXPECT_EQ(pair_count(1024), 1024ull * 1023 / 2);
}

TEST(Dynamic, ImportanceOverTrees) {
  ShortestPathTree t;
  t.source = 0;
  t.dist = {0, 5, INF_WEIGHT};
  t.parent = {NO_PARENT, 0, NO_PARENT};
  std::vector<ShortestPathTree> trees = {t, t};
  EXPECT_NEAR(static_cast<double>(importance_over_trees(trees, 5.0L, 0, 1, 5)),
              1.0, 1e-12);
  EXPECT_NEAR(static_cast<double>(importance_over_trees(trees, 5.0L, 0, 1, 4)),
              25.0, 1e-12);  // violates both copies
  EXPECT_NEAR(static_cast<double>(importance_over_trees(trees, 5.0L, 1, 2, 99)),
              25.0, 1e-12);  // one unreachable endpoint
  EXPECT_NEAR(static_cast<double>(importance_over_trees(trees, 5.0L, 0, 2, 1)),
              25.0, 1e-12);
  EXPECT_NEAR(static_cast<double>(importance_over_trees({}, 5.0L, 0, 1, 1)),
              1.0, 1e-12);
}

TEST(Dynamic, SampleRoundReturnsEveryPresentEdgeWhenUniform) {
  Graph g = random_connected_graph(12, 20, 100, 6);
  std::vector<std::uint64_t> deleted;
  EdgeStream stream = deletion_stream(g, 0.3, 5, &deleted);
  EXPECT_EQ(deleted.size(), 6u);

  Config cfg;
  cfg.n = 12;
  cfg.eps = 0.5;
  cfg.k = 2;
  cfg.seed = 3;
  SpaceLedger ledger;
  DynamicSampleStats stats;
  ImportanceOracle uniform = [](std::uint32_t, std::uint32_t, Weight) {
    return 1.0L;
  };
  std::vector<Edge> sample =
      dynamic_sample_round(stream, uniform, cfg, 1, ledger, &stats);
  EXPECT_EQ(stream.passes_consumed(), 1u);
  EXPECT_EQ(ledger.live_words(), 0u);  // slots and arena both released

  // The bank draws thousands of samplers over 14 equal-weight edges, so every
  // present edge is drawn (fixed seed; the miss probability is ~e^{-850}).
  Graph final_graph = materialize_final_graph(stream);
  EXPECT_EQ(stats.present_edges, final_graph.m());
  EXPECT_EQ(stats.successes, SamplerBank::bank_size(12, 2, 0.5));
  ASSERT_EQ(sample.size(), final_graph.m());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    EXPECT_EQ(sample[i].u, final_graph.edges()[i].u);
    EXPECT_EQ(sample[i].v, final_graph.edges()[i].v);
    EXPECT_EQ(sample[i].w, final_graph.edges()[i].w);
  }
  EXPECT_GT(stats.virtual_bank_words, stats.successes);  // full-bank footprint
}

TEST(Dynamic, NetMultiplicityMustBeZeroOrOne) {
  std::vector<EdgeUpdate> updates = {{0, 1, 5, +1}, {0, 1, 5, +1}};
  EdgeStream stream =
      EdgeStream::from_updates(4, StreamMode::dynamic, std::move(updates));
  Config cfg;
  cfg.n = 4;
  cfg.eps = 0.5;
  cfg.k = 2;
  SpaceLedger ledger;
  ImportanceOracle uniform = [](std::uint32_t, std::uint32_t, Weight) {
    return 1.0L;
  };
  EXPECT_THROW(dynamic_sample_round(stream, uniform, cfg, 1, ledger),
               invalid_input);
}

TEST(Dynamic, SampleRoundRejectsInsertionStreams) {
  Graph g = random_connected_graph(8, 10, 50, 2);
  EdgeStream ins = graph_stream(g);
  Config cfg;
  cfg.n = 8;
  cfg.eps = 0.5;
  cfg.k = 2;
  SpaceLedger ledger;
  ImportanceOracle uniform = [](std::uint32_t, std::uint32_t, Weight) {
    return 1.0L;
  };
  EXPECT_THROW(dynamic_sample_round(ins, uniform, cfg, 1, ledger),
               invalid_input);
  EXPECT_THROW(approx_sssp_dynamic(ins, cfg, ledger), invalid_input);
}

// The feed is scale-invariant: importances whose maximum exceeds the
// fixed-point cap take the rescale path, and when the two paths encode the
// same relative magnitudes the drawn edges are identical. Powers of two make
// both encodings exact, so this holds bitwise.
TEST(Dynamic, RescalePathPreservesRelativeImportances) {
  Graph g = random_connected_graph(12, 24, 8, 9);
  Config cfg;
  cfg.n = 12;
  cfg.eps = 0.5;
  cfg.k = 2;
  cfg.seed = 14;

  ImportanceOracle small = [](std::uint32_t, std::uint32_t, Weight w) {
    return static_cast<long double>(w);  // max 8 = 2^3, exact path
  };
  ImportanceOracle huge = [](std::uint32_t, std::uint32_t, Weight w) {
    return static_cast<long double>(w) * 1073741824.0L;  // 2^30, rescale path
  };

  SpaceLedger l1, l2;
  EdgeStream s1 = deletion_stream(g, 0.25, 4);
  EdgeStream s2 = deletion_stream(g, 0.25, 4);
  std::vector<Edge> a = dynamic_sample_round(s1, small, cfg, 2, l1);
  std::vector<Edge> b = dynamic_sample_round(s2, huge, cfg, 2, l2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].u, b[i].u);
    EXPECT_EQ(a[i].v, b[i].v);
    EXPECT_EQ(a[i].w, b[i].w);
  }
}

TEST(Dynamic, EndToEndMatchesFinalGraphDistances) {
  Graph g = random_connected_graph(16, 48, 1000, 13);
  std::vector<std::uint64_t> deleted;
  EdgeStream stream = deletion_stream(g, 0.2, 21, &deleted);
  Config cfg;
  cfg.n = 16;
  cfg.eps = 0.5;
  cfg.k = 2;
  cfg.seed = 8;
  SpaceLedger ledger;
  SsspResult res = approx_sssp_dynamic(stream, cfg, ledger);

  const std::uint32_t R = cfg.rounds();
  EXPECT_EQ(res.metrics.passes_total, 2u * R);
  EXPECT_EQ(res.metrics.passes_rounds, 2u * R);
  EXPECT_EQ(res.metrics.rounds, R);
  EXPECT_TRUE(res.metrics.spanner_reference_only);
  EXPECT_GT(res.metrics.virtual_sampler_words, 0u);

  // Distances must match the post-deletion graph, not the insertion graph.
  Graph final_graph = materialize_final_graph(stream);
  EXPECT_EQ(res.metrics.distinct_edges, final_graph.m());
  EXPECT_EQ(final_graph.m(), g.m() - deleted.size());
  std::vector<Weight> opt = oracle::bellman_ford(final_graph, cfg.source);
  for (std::uint32_t v = 0; v < final_graph.n(); ++v)
    EXPECT_EQ(res.tree.dist[v], opt[v]) << "vertex " << v;
  EXPECT_DOUBLE_EQ(approximation_ratio(final_graph, cfg.source, res.tree), 1.0);
  EXPECT_TRUE(check_fail_counts(res.metrics.max_fail_count, cfg.eps, cfg.k, R));
  ASSERT_EQ(res.metrics.q_trace.size(), R);
}

// Regression: deleted far-apart pairs violate every round tree, so their
// importance grows like base^R and overflows any fixed-width encoding unless
// the round rescales. This exact configuration used to abort with a
// fixed-point overflow.
TEST(Dynamic, ExplodingDeletedImportancesDoNotOverflow) {
  Graph g = random_connected_graph(32, 200, 1000, 11);
  EdgeStream stream = deletion_stream(g, 0.2, 42);
  Config cfg;
  cfg.n = 32;
  cfg.eps = 0.5;
  cfg.k = 2;
  cfg.seed = 7;
  SpaceLedger ledger;
  SsspResult res;
  ASSERT_NO_THROW(res = approx_sssp_dynamic(stream, cfg, ledger));
  EXPECT_EQ(res.metrics.passes_total, 160u);
  Graph final_graph = materialize_final_graph(stream);
  EXPECT_DOUBLE_EQ(approximation_ratio(final_graph, cfg.source, res.tree), 1.0);
}

TEST(Dynamic, DispatchRoutesByStreamMode) {
  Graph g = random_connected_graph(12, 24, 100, 3);
  Config cfg;
  cfg.n = 12;
  cfg.eps = 0.5;
  cfg.k = 2;
  cfg.seed = 5;

  SpaceLedger l1, l2;
  EdgeStream ins = graph_stream(g);
  SsspResult via_dispatch = approx_sssp(ins, cfg, l1);
  SsspResult direct = approx_sssp_explicit(g, cfg, l2);
  EXPECT_TRUE(via_dispatch.tree == direct.tree);
  EXPECT_EQ(via_dispatch.metrics.passes_total, 1u + 2u * cfg.rounds());

  SpaceLedger l3;
  EdgeStream dyn = deletion_stream(g, 0.25, 2);
  SsspResult dynamic_run = approx_sssp(dyn, cfg, l3);
  EXPECT_EQ(dynamic_run.metrics.passes_total, 2u * cfg.rounds());
  EXPECT_TRUE(dynamic_run.metrics.spanner_reference_only);
}

}  // namespace
