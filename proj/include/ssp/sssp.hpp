#pragma once
// Multi-round importance-sampled single-source shortest paths.
//
// One spanner pass, then R = ceil(10 k^2 / eps) rounds of two passes each:
// pass one sums edge importances (Q), pass two samples each edge with
// probability min{1, (10/eps) k n^{1+1/k} log2(n) q_e / Q}. Each round builds
// the shortest-path tree of spanner-plus-sample; an edge whose endpoint
// distances differ by more than its weight "fails" and its importance grows
// by a (1 + n^{1/k}) factor. The answer is the shortest-path tree of the
// union of all round trees.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssp/common.hpp"
#include "ssp/graph.hpp"
#include "ssp/spanner.hpp"
#include "ssp/stream.hpp"

namespace ssp {

struct Config {
  std::uint32_t n = 0;
  std::uint32_t source = 0;
  double eps = 0.25;
  std::uint32_t k = 2;
  std::uint64_t seed = 0;

  std::uint32_t rounds() const {
    return static_cast<std::uint32_t>(
        std::ceil(10.0 * static_cast<double>(k) * k / eps));
  }

  // Validates ranges; returns human-readable warnings (k above ln n is legal
  // up to ceil(ln n) but costs more rounds than the analysis needs).
  std::vector<std::string> validate() const {
    if (n < 2) throw invalid_input("config: n must be >= 2");
    if (source >= n) throw invalid_input("config: source out of range");
    if (!(eps > 0.0) || eps >= 1.0)
      throw invalid_input("config: eps must lie in (0,1)");
    double ln_n = std::log(static_cast<double>(n));
    if (k < 1 || static_cast<double>(k) > std::ceil(ln_n))
      throw invalid_input("config: k must lie in [1, ceil(ln n)]");
    std::vector<std::string> warnings;
    if (static_cast<double>(k) > ln_n)
      warnings.push_back("config: k exceeds ln n; extra rounds without benefit");
    return warnings;
  }
};

// Edge fails against a tree when its endpoint distances differ by more than
// its weight. One unreachable endpoint fails; two unreachable endpoints do not.
inline bool violates(const ShortestPathTree& t, std::uint32_t u, std::uint32_t v,
                     Weight w) {
  Weight du = t.dist[u], dv = t.dist[v];
  if (du == INF_WEIGHT && dv == INF_WEIGHT) return false;
  if (du == INF_WEIGHT || dv == INF_WEIGHT) return true;
  Weight gap = du > dv ? du - dv : dv - du;
  return gap > w;
}

// Importance growth base 1 + n^{1/k}.
inline long double importance_base(std::uint32_t n, std::uint32_t k) {
  return 1.0L + powl(static_cast<long double>(n), 1.0L / k);
}

// Shared prefactor of the sampling probability: (10/eps) k n^{1+1/k} log2(n).
// Hoisted out of sampling_prob so the round loop can compute it once per pass
// instead of re-evaluating powl per edge.
inline long double sampling_coefficient(std::uint32_t n, std::uint32_t k,
                                        double eps) {
  return (10.0L / static_cast<long double>(eps)) *
         static_cast<long double>(k) *
         powl(static_cast<long double>(n), 1.0L + 1.0L / k) *
         log2l(static_cast<long double>(n));
}

// Sampling probability min{1, (10/eps) k n^{1+1/k} log2(n) q/Q}.
inline double sampling_prob(std::uint32_t n, std::uint32_t k, double eps,
                            long double q, long double big_q) {
  if (!(big_q > 0.0L)) throw invalid_input("sampling_prob: Q must be positive");
  if (!(q >= 0.0L)) throw invalid_input("sampling_prob: q must be non-negative");
  long double p = sampling_coefficient(n, k, eps) * q / big_q;
  return p >= 1.0L ? 1.0 : static_cast<double>(p);
}

// Rolling state across rounds: the spanner, every round tree (the implicit
// importance structure), the Q trace, and a per-edge cache of fail counts
// that is maintained incrementally and always equals a recount against the
// stored trees.
struct RoundState {
  Config cfg;
  Graph spanner;
  std::vector<ShortestPathTree> trees;
  std::vector<long double> big_q_trace;
  std::uint32_t round = 0;  // rounds completed

  struct EdgeEntry {
    std::uint64_t key = 0;        // pair rank of (u, v)
    std::uint32_t u = 0, v = 0;   // endpoints, u < v
    Weight weight = 0;            // first-seen weight (duplicates keep the first)
    std::uint32_t fails = 0;      // fail count over trees_seen round trees
    std::uint32_t trees_seen = 0;
    std::uint64_t last_pass = 0;  // duplicate suppression within one pass
    long double q = 1.0L;
  };
  // Dense entry storage plus a key index. Passes address entries by dense id
  // so replayed passes avoid rehashing (see RoundScratch::slots).
  std::vector<EdgeEntry> entries;
  std::unordered_map<std::uint64_t, std::uint32_t> index;

  long double base = 0.0L;  // importance growth base

  // Ledger words per distinct edge: the entry fields (key, endpoints, weight,
  // counts, pass marker, extended-precision importance) plus index overhead.
  static constexpr std::size_t WORDS_PER_EDGE_ENTRY = 9;

  // Dense id for a key, creating the entry on first sight.
  std::uint32_t locate(std::uint64_t key, std::uint32_t u, std::uint32_t v,
                       Weight w, SpaceLedger& ledger) {
    auto [it, inserted] =
        index.try_emplace(key, static_cast<std::uint32_t>(entries.size()));
    if (inserted) {
      EdgeEntry e;
      e.key = key;
      e.u = u < v ? u : v;
      e.v = u < v ? v : u;
      e.weight = w;
      entries.push_back(e);
      ledger.charge(WORDS_PER_EDGE_ENTRY);
    }
    return it->second;
  }

  // Brings an entry's fail count up to date with the stored trees.
  void catch_up(EdgeEntry& e) {
    while (e.trees_seen < trees.size()) {
      if (violates(trees[e.trees_seen], e.u, e.v, e.weight)) {
        ++e.fails;
        e.q *= base;
      }
      ++e.trees_seen;
    }
  }
};

// Definitional importance of an edge: base^(number of stored trees the edge
// fails against). The round loop keeps an incrementally maintained copy; this
// recount is the ground truth it is tested against.
inline long double importance(const RoundState& state, std::uint32_t u,
                              std::uint32_t v, Weight w) {
  std::uint32_t fails = 0;
  for (const ShortestPathTree& t : state.trees)
    if (violates(t, u, v, w)) ++fails;
  return powl(state.base, static_cast<long double>(fails));
}

struct RoundStats {
  long double big_q = 0.0L;
  std::size_t sampled_edges = 0;
  std::size_t distinct_edges = 0;
  bool reused_tree = false;
};

namespace detail {

struct RoundScratch {
  std::vector<Edge> sample;     // F^{(r)} (released after tree construction)
  std::optional<Graph> full_union;  // cached H + E when the sample saturates
  bool last_was_full = false;
  // Stream position -> dense entry id, learned on the first pass. Passes
  // replay the same update sequence, so later passes hit this cache and skip
  // the hash lookup; every hit is verified against the entry key and falls
  // back to the index on mismatch.
  std::vector<std::uint32_t> slots;
  static constexpr std::uint32_t NO_SLOT = 0xffffffffu;
};

// Entry id for the update at stream position pos, via the positional cache.
inline std::uint32_t slot_locate(RoundState& state, RoundScratch& scratch,
                                 std::size_t pos, const EdgeUpdate& upd,
                                 std::uint32_t n, SpaceLedger& ledger) {
  std::uint64_t key = pair_rank(upd.u, upd.v, n);
  if (pos < scratch.slots.size()) {
    std::uint32_t id = scratch.slots[pos];
    if (id != RoundScratch::NO_SLOT && state.entries[id].key == key) return id;
  } else {
    scratch.slots.resize(pos + 1, RoundScratch::NO_SLOT);
    ledger.charge(1);
  }
  std::uint32_t id = state.locate(key, upd.u, upd.v, upd.w, ledger);
  scratch.slots[pos] = id;
  return id;
}

}  // namespace detail

// One insertion-mode round: two metered passes, one appended tree.
inline RoundStats run_round(RoundState& state, EdgeStream& stream,
                            SpaceLedger& ledger, detail::RoundScratch& scratch) {
  const std::uint32_t r = state.round + 1;
  RoundStats stats;

  // Pass 1: importance total.
  {
    auto pass = stream.begin_pass();
    const std::uint64_t pass_id = stream.passes_consumed();
    long double q_sum = 0.0L;
    std::size_t pos = 0;
    for (const EdgeUpdate& upd : pass) {
      std::uint32_t id =
          detail::slot_locate(state, scratch, pos++, upd, stream.n(), ledger);
      RoundState::EdgeEntry& e = state.entries[id];
      if (e.last_pass == pass_id) continue;  // duplicate; first occurrence kept
      e.last_pass = pass_id;
      state.catch_up(e);
      q_sum += e.q;
    }
    state.big_q_trace.push_back(q_sum);
    stats.big_q = q_sum;
  }
  stats.distinct_edges = state.entries.size();

  // Pass 2: Bernoulli sample, one counter-based draw per (round, edge).
  // p >= 1 needs no randomness, so the draw happens only on the sub-1 branch.
  scratch.sample.clear();
  const long double coeff =
      sampling_coefficient(state.cfg.n, state.cfg.k, state.cfg.eps);
  {
    auto pass = stream.begin_pass();
    const std::uint64_t pass_id = stream.passes_consumed();
    std::size_t pos = 0;
    for (const EdgeUpdate& upd : pass) {
      std::uint32_t id =
          detail::slot_locate(state, scratch, pos++, upd, stream.n(), ledger);
      RoundState::EdgeEntry& e = state.entries[id];
      if (e.last_pass == pass_id) continue;
      e.last_pass = pass_id;
      long double p = coeff * e.q / stats.big_q;
      if (p >= 1.0L ||
          u01(prf(state.cfg.seed, TAG_EDGE_SAMPLE, r, e.key)) <
              static_cast<double>(p))
        scratch.sample.push_back(Edge{e.u, e.v, e.weight});
    }
  }
  stats.sampled_edges = scratch.sample.size();
  ledger.charge(2 * scratch.sample.size());

  const bool full = stats.sampled_edges == stats.distinct_edges;
  if (full && scratch.last_was_full && scratch.full_union.has_value()) {
    // Saturated sample both rounds: H + F is the same graph, so the
    // deterministic tree is identical. Reuse it instead of re-running Dijkstra.
    state.trees.push_back(state.trees.back());
    stats.reused_tree = true;
  } else {
    Graph round_graph = union_graphs(
        state.spanner, Graph(state.cfg.n, scratch.sample));
    ledger.charge(2 * round_graph.m());
    state.trees.push_back(shortest_path_tree(round_graph, state.cfg.source));
    if (full) {
      if (scratch.full_union.has_value())
        ledger.release(2 * scratch.full_union->m());
      scratch.full_union = std::move(round_graph);  // stays charged while cached
    } else {
      ledger.release(2 * round_graph.m());
      if (scratch.full_union.has_value()) {
        ledger.release(2 * scratch.full_union->m());
        scratch.full_union.reset();
      }
    }
  }
  scratch.last_was_full = full;
  ledger.charge(state.trees.back().words());
  ledger.release(2 * scratch.sample.size());
  scratch.sample.clear();
  state.round = r;
  return stats;
}

struct Metrics {
  std::uint64_t passes_total = 0;
  std::uint64_t passes_spanner = 0;
  std::uint64_t passes_rounds = 0;
  std::size_t peak_words = 0;
  std::uint32_t rounds = 0;
  std::size_t distinct_edges = 0;
  std::vector<long double> q_trace;
  std::uint64_t max_fail_count = 0;
  bool spanner_reference_only = false;
  std::size_t virtual_sampler_words = 0;  // dynamic mode: full-bank footprint
  std::vector<std::string> warnings;
};

struct SsspResult {
  ShortestPathTree tree;
  Metrics metrics;
  RoundState state;
};

// True iff consecutive trace entries obey Q_{r+1} <= (1 + eps/(10k)) Q_r.
inline std::uint32_t potential_violations(const std::vector<long double>& trace,
                                          double eps, std::uint32_t k) {
  std::uint32_t bad = 0;
  const long double factor = 1.0L + static_cast<long double>(eps) / (10.0L * k);
  for (std::size_t i = 0; i + 1 < trace.size(); ++i)
    if (trace[i + 1] > factor * trace[i]) ++bad;
  return bad;
}

inline bool check_potential_growth(const std::vector<long double>& trace,
                                   double eps, std::uint32_t k) {
  return potential_violations(trace, eps, k) == 0;
}

// True iff no edge failed more than eps*R/(2k) rounds.
inline bool check_fail_counts(std::uint64_t max_fail_count, double eps,
                              std::uint32_t k, std::uint32_t rounds) {
  return static_cast<long double>(max_fail_count) <=
         static_cast<long double>(eps) * rounds / (2.0L * k);
}

namespace detail {

inline SsspResult finish_run(RoundState&& state, EdgeStream& stream,
                             SpaceLedger& ledger, Metrics&& metrics) {
  // Final fail-count catch-up against the last tree is a local computation
  // over the cached edge set (no stream pass).
  for (RoundState::EdgeEntry& entry : state.entries) {
    state.catch_up(entry);
    metrics.max_fail_count =
        std::max<std::uint64_t>(metrics.max_fail_count, entry.fails);
  }

  // H*: union of all round trees, then its shortest-path tree.
  std::unordered_map<std::uint64_t, Weight> star_edges;
  for (const ShortestPathTree& t : state.trees)
    for (const Edge& e : tree_edges(t))
      star_edges.try_emplace(pair_rank(e.u, e.v, state.cfg.n), e.w);
  std::vector<Edge> edges;
  edges.reserve(star_edges.size());
  for (const auto& [key, w] : star_edges) {
    auto [u, v] = pair_unrank(key, state.cfg.n);
    edges.push_back(Edge{u, v, w});
  }
  ledger.charge(2 * edges.size());
  Graph h_star(state.cfg.n, std::move(edges));
  ShortestPathTree final_tree = shortest_path_tree(h_star, state.cfg.source);
  ledger.charge(final_tree.words());
  ledger.release(2 * h_star.m());

  metrics.rounds = state.round;
  metrics.distinct_edges = state.entries.size();
  metrics.q_trace = state.big_q_trace;
  metrics.passes_total = stream.passes_consumed();
  metrics.peak_words = ledger.peak_words();
  for (const std::string& w : stream.warnings()) metrics.warnings.push_back(w);
  return SsspResult{std::move(final_tree), std::move(metrics), std::move(state)};
}

}  // namespace detail

// Insertion-mode run: 1 spanner pass + 2 passes per round, exactly
// 1 + 2*rounds() metered passes in total.
inline SsspResult approx_sssp_insertion(EdgeStream& stream, const Config& cfg,
                                        SpaceLedger& ledger) {
  Metrics metrics;
  metrics.warnings = cfg.validate();
  if (stream.n() != cfg.n)
    throw invalid_input("approx_sssp: config n does not match stream");
  if (stream.mode() != StreamMode::insertion)
    throw invalid_input("approx_sssp_insertion: insertion streams only");

  RoundState state;
  state.cfg = cfg;
  state.base = importance_base(cfg.n, cfg.k);

  {
    SpannerBuilder builder(cfg.n, cfg.k, cfg.eps, &ledger);
    auto pass = stream.begin_pass();
    for (const EdgeUpdate& e : pass) builder.offer(e.u, e.v, e.w);
    state.spanner = builder.graph();
    ledger.charge(2 * state.spanner.m());  // spanner held for the whole run
  }
  metrics.passes_spanner = 1;

  detail::RoundScratch scratch;
  const std::uint32_t R = cfg.rounds();
  for (std::uint32_t r = 0; r < R; ++r) run_round(state, stream, ledger, scratch);
  if (scratch.full_union.has_value())
    ledger.release(2 * scratch.full_union->m());
  ledger.release(scratch.slots.size());
  metrics.passes_rounds = 2ULL * R;

  return detail::finish_run(std::move(state), stream, ledger, std::move(metrics));
}

// Explicit mode: the whole graph is in memory. Runs the identical pipeline on
// an in-memory stream, so trees are bitwise identical to a streaming run over
// the same edges and seed.
inline SsspResult approx_sssp_explicit(const Graph& g, const Config& cfg,
                                       SpaceLedger& ledger) {
  std::vector<EdgeUpdate> updates;
  updates.reserve(g.m());
  for (const Edge& e : g.edges()) updates.push_back(EdgeUpdate{e.u, e.v, e.w, +1});
  EdgeStream stream =
      EdgeStream::from_updates(g.n(), StreamMode::insertion, std::move(updates));
  return approx_sssp_insertion(stream, cfg, ledger);
}

// Worst tree-distance / true-distance over vertices reachable in g. Requires
// the tree to agree with g on reachability; returns infinity otherwise.
inline double approximation_ratio(const Graph& g, std::uint32_t source,
                                  const ShortestPathTree& tree) {
  ShortestPathTree opt = shortest_path_tree(g, source);
  double worst = 1.0;
  for (std::uint32_t v = 0; v < g.n(); ++v) {
    if (v == source) continue;
    if (opt.dist[v] == INF_WEIGHT) {
      if (tree.dist[v] != INF_WEIGHT)
        return std::numeric_limits<double>::infinity();
      continue;
    }
    if (tree.dist[v] == INF_WEIGHT)
      return std::numeric_limits<double>::infinity();
    if (opt.dist[v] == 0) {
      if (tree.dist[v] != 0) return std::numeric_limits<double>::infinity();
      continue;
    }
    worst = std::max(worst, static_cast<double>(tree.dist[v]) /
                                static_cast<double>(opt.dist[v]));
  }
  return worst;
}

}  // namespace ssp
