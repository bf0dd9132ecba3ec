#pragma once
// Insert/delete (dynamic) stream runs. Each round consumes two metered
// passes: one accumulates the importance total Q by signed summation (an
// insert adds q_e, the matching delete subtracts the identical value, so
// cancelled edges contribute nothing), and one materializes the net
// importance vector and applies a bank of l1 samplers to draw the round's
// edge set. The spanner is rebuilt from the reference final graph and
// flagged as such in metrics, since a one-pass dynamic spanner is a separate
// construction outside this library's scope.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ssp/common.hpp"
#include "ssp/graph.hpp"
#include "ssp/l1_sampler.hpp"
#include "ssp/spanner.hpp"
#include "ssp/sssp.hpp"
#include "ssp/stream.hpp"

namespace ssp {

inline std::uint64_t pair_count(std::uint32_t n) {
  return static_cast<std::uint64_t>(n) * (n - 1) / 2;
}

// Importance replay against a tree list: base^(number of trees violated).
inline long double importance_over_trees(
    const std::vector<ShortestPathTree>& trees, long double base,
    std::uint32_t u, std::uint32_t v, Weight w) {
  std::uint32_t fails = 0;
  for (const ShortestPathTree& t : trees)
    if (violates(t, u, v, w)) ++fails;
  return powl(base, static_cast<long double>(fails));
}

using ImportanceOracle =
    std::function<long double(std::uint32_t, std::uint32_t, Weight)>;

struct DynamicSampleStats {
  std::size_t present_edges = 0;      // nonzero net coordinates
  std::size_t successes = 0;          // successful sampler draws (with dupes)
  std::size_t virtual_bank_words = 0; // full-bank footprint (not held)
};

// Sampler updates encode importances as fixed-point integers with
// FIXED_POINT_BITS fractional bits. Importances of always-violating pairs
// grow like base^rounds and can overflow any fixed-width encoding, so when a
// round's maximum importance would push the feed past this cap, that round is
// rescaled so the maximum maps exactly to the cap. Scaling is linear
// (insert/delete cancellation is unaffected) and leaves the sampled
// distribution unchanged up to quantization; an edge quantizes to zero only
// when its importance is below 2^-40 of the maximum, where its sampling
// probability is negligible anyway.
inline constexpr std::int64_t IMPORTANCE_FEED_CAP = std::int64_t{1} << 40;

// One dynamic sampling step (one metered pass): builds the net importance
// vector x with x_e = q_e on present edges and 0 elsewhere, feeds a bank of
// ceil(20 eps^-1 k n^{1+1/k} log2 n) samplers at (eps/10, eps/10), and
// returns the distinct successfully sampled edges. Samplers are sized for
// all vertex pairs (dim = n(n-1)/2).
inline std::vector<Edge> dynamic_sample_round(EdgeStream& stream,
                                              const ImportanceOracle& oracle,
                                              const Config& cfg,
                                              std::uint32_t round,
                                              SpaceLedger& ledger,
                                              DynamicSampleStats* stats = nullptr) {
  if (stream.mode() != StreamMode::dynamic)
    throw invalid_input("dynamic_sample_round: dynamic streams only");

  struct Slot {
    std::int64_t count = 0;      // net multiplicity
    long double q_net = 0.0L;    // signed importance sum; survivor's q when count is 1
    Weight w = 0;                // weight of the latest insertion
  };
  std::unordered_map<std::uint64_t, Slot> net;
  {
    auto pass = stream.begin_pass();
    for (const EdgeUpdate& upd : pass) {
      long double q = oracle(upd.u, upd.v, upd.w);
      std::uint64_t idx = pair_rank(upd.u, upd.v, stream.n());
      auto [it, inserted] = net.try_emplace(idx);
      if (inserted) ledger.charge(5);
      Slot& slot = it->second;
      slot.count += upd.sign;
      slot.q_net += upd.sign > 0 ? q : -q;
      if (upd.sign > 0) slot.w = upd.w;
    }
  }

  long double max_q = 0.0L;
  std::size_t present = 0;
  for (const auto& [idx, slot] : net) {
    if (slot.count == 0) continue;
    if (slot.count != 1)
      throw invalid_input("dynamic stream: net edge multiplicity must be 0 or 1");
    ++present;
    if (slot.q_net > max_q) max_q = slot.q_net;
  }

  std::vector<std::pair<std::uint64_t, std::int64_t>> updates;
  updates.reserve(present);
  if (max_q > 0.0L) {
    const long double fixed_one =
        static_cast<long double>(std::int64_t{1} << FIXED_POINT_BITS);
    const long double cap = static_cast<long double>(IMPORTANCE_FEED_CAP);
    const long double scale =
        max_q * fixed_one <= cap ? fixed_one : cap / max_q;
    for (const auto& [idx, slot] : net) {
      if (slot.count != 1) continue;
      std::int64_t v = llroundl(slot.q_net * scale);
      if (v != 0) updates.emplace_back(idx, v);
    }
  }
  std::sort(updates.begin(), updates.end());

  SamplerBank bank(pair_count(cfg.n), cfg.eps / 10.0, cfg.eps / 10.0,
                   SamplerBank::bank_size(cfg.n, cfg.k, cfg.eps), cfg.seed);
  ledger.charge(bank.sampler_words());  // reusable arena, one sampler at a time
  std::vector<std::uint64_t> successes = bank.run(round, updates);
  ledger.release(bank.sampler_words());

  std::vector<std::uint64_t> distinct = successes;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<Edge> sample;
  sample.reserve(distinct.size());
  for (std::uint64_t idx : distinct) {
    auto [u, v] = pair_unrank(idx, cfg.n);
    sample.push_back(Edge{u, v, net.at(idx).w});
  }
  if (stats != nullptr) {
    stats->present_edges = present;
    stats->successes = successes.size();
    stats->virtual_bank_words = bank.virtual_words();
  }
  ledger.release(5 * net.size());
  return sample;
}

// Dynamic-mode run: 2 passes per round, 2 * rounds() metered passes total.
// The spanner comes from the materialized final graph (reference only).
inline SsspResult approx_sssp_dynamic(EdgeStream& stream, const Config& cfg,
                                      SpaceLedger& ledger) {
  Metrics metrics;
  metrics.warnings = cfg.validate();
  if (stream.n() != cfg.n)
    throw invalid_input("approx_sssp: config n does not match stream");
  if (stream.mode() != StreamMode::dynamic)
    throw invalid_input("approx_sssp_dynamic: dynamic streams only");

  RoundState state;
  state.cfg = cfg;
  state.base = importance_base(cfg.n, cfg.k);

  Graph final_graph = materialize_final_graph(stream);  // reference only
  {
    SpannerBuilder builder(cfg.n, cfg.k, cfg.eps, &ledger);
    for (const Edge& e : final_graph.edges()) builder.offer(e.u, e.v, e.w);
    state.spanner = builder.graph();
    ledger.charge(2 * state.spanner.m());
  }
  metrics.spanner_reference_only = true;

  ImportanceOracle oracle = [&state](std::uint32_t u, std::uint32_t v,
                                     Weight w) {
    return importance_over_trees(state.trees, state.base, u, v, w);
  };

  const std::uint32_t R = cfg.rounds();
  bool last_was_full = false;
  for (std::uint32_t r = 1; r <= R; ++r) {
    {
      auto pass = stream.begin_pass();
      long double q_sum = 0.0L;
      for (const EdgeUpdate& upd : pass) {
        long double q = oracle(upd.u, upd.v, upd.w);
        q_sum += upd.sign > 0 ? q : -q;
      }
      state.big_q_trace.push_back(q_sum);
    }

    DynamicSampleStats stats;
    std::vector<Edge> sample =
        dynamic_sample_round(stream, oracle, cfg, r, ledger, &stats);
    metrics.virtual_sampler_words =
        std::max(metrics.virtual_sampler_words, stats.virtual_bank_words);
    ledger.charge(2 * sample.size());

    const bool full = sample.size() == stats.present_edges;
    if (full && last_was_full) {
      // Same saturated edge set as last round: identical graph, identical
      // deterministic tree.
      state.trees.push_back(state.trees.back());
    } else {
      Graph round_graph = union_graphs(state.spanner, Graph(cfg.n, sample));
      ledger.charge(2 * round_graph.m());
      state.trees.push_back(shortest_path_tree(round_graph, cfg.source));
      ledger.release(2 * round_graph.m());
    }
    last_was_full = full;
    ledger.charge(state.trees.back().words());
    ledger.release(2 * sample.size());
    state.round = r;
  }

  // Fail counts are replayed locally over the reference final graph.
  for (const Edge& e : final_graph.edges()) {
    std::uint32_t fails = 0;
    for (const ShortestPathTree& t : state.trees)
      if (violates(t, e.u, e.v, e.w)) ++fails;
    metrics.max_fail_count = std::max<std::uint64_t>(metrics.max_fail_count, fails);
  }

  std::unordered_map<std::uint64_t, Weight> star_edges;
  for (const ShortestPathTree& t : state.trees)
    for (const Edge& e : tree_edges(t))
      star_edges.try_emplace(pair_rank(e.u, e.v, cfg.n), e.w);
  std::vector<Edge> edges;
  edges.reserve(star_edges.size());
  for (const auto& [key, w] : star_edges) {
    auto [u, v] = pair_unrank(key, cfg.n);
    edges.push_back(Edge{u, v, w});
  }
  ledger.charge(2 * edges.size());
  Graph h_star(cfg.n, std::move(edges));
  ShortestPathTree final_tree = shortest_path_tree(h_star, cfg.source);
  ledger.charge(final_tree.words());
  ledger.release(2 * h_star.m());

  metrics.rounds = state.round;
  metrics.distinct_edges = final_graph.m();
  metrics.q_trace = state.big_q_trace;
  metrics.passes_total = stream.passes_consumed();
  metrics.passes_rounds = 2ULL * R;
  metrics.peak_words = ledger.peak_words();
  for (const std::string& w : stream.warnings()) metrics.warnings.push_back(w);
  return SsspResult{std::move(final_tree), std::move(metrics), std::move(state)};
}

// Mode dispatch: one entry point for both stream kinds.
inline SsspResult approx_sssp(EdgeStream& stream, const Config& cfg,
                              SpaceLedger& ledger) {
  return stream.mode() == StreamMode::insertion
             ? approx_sssp_insertion(stream, cfg, ledger)
             : approx_sssp_dynamic(stream, cfg, ledger);
}

}  // namespace ssp
