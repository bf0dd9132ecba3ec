#pragma once
// Deterministic instance generators: seeded random connected graphs, stream
// orderings, dynamic streams with deletions, and the constant-density family
// used for space-shape benchmarks. Everything is a pure function of its seed.

#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "ssp/common.hpp"
#include "ssp/graph.hpp"
#include "ssp/hard_instances.hpp"
#include "ssp/stream.hpp"

namespace ssp {

// Connected graph on n vertices with exactly m edges: a random recursive
// tree plus distinct extra edges, weights uniform in [1, max_w].
inline Graph random_connected_graph(std::uint32_t n, std::uint64_t m,
                                    Weight max_w, std::uint64_t seed) {
  if (n < 2) throw invalid_input("random_connected_graph: n must be >= 2");
  const std::uint64_t max_m = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (m < n - 1 || m > max_m)
    throw invalid_input("random_connected_graph: m outside [n-1, n(n-1)/2]");
  if (max_w < 1 || max_w > MAX_EDGE_WEIGHT)
    throw invalid_input("random_connected_graph: bad weight bound");

  std::unordered_set<std::uint64_t> keys;
  std::vector<Edge> edges;
  edges.reserve(m);
  auto add = [&](std::uint32_t u, std::uint32_t v) {
    std::uint64_t key = pair_rank(u, v, n);
    if (!keys.insert(key).second) return false;
    Weight w = max_w == 1
                   ? 1
                   : 1 + static_cast<Weight>(prf(seed, TAG_WEIGHT, key, 0) %
                                             max_w);
    edges.push_back(Edge{u, v, w});
    return true;
  };
  for (std::uint32_t v = 1; v < n; ++v)
    add(static_cast<std::uint32_t>(prf(seed, TAG_GRAPH_GEN, 0, v) % v), v);
  std::uint64_t draw = 0;
  while (edges.size() < m) {
    std::uint64_t key = prf(seed, TAG_GRAPH_GEN, 1, draw++) % max_m;
    auto [u, v] = pair_unrank(key, n);
    add(u, v);
  }
  return Graph(n, std::move(edges));
}

// Edge count of the constant-density benchmark family:
// m(n) = floor(0.3 n^1.5 log2 n), clamped into the connected-simple range.
inline std::uint64_t density_family_edges(std::uint32_t n) {
  long double m = 0.3L * powl(static_cast<long double>(n), 1.5L) *
                  log2l(static_cast<long double>(n));
  std::uint64_t max_m = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::uint64_t out = static_cast<std::uint64_t>(m);
  if (out < n - 1) out = n - 1;
  if (out > max_m) out = max_m;
  return out;
}

// Insertion stream of a graph's edges in canonical order.
inline EdgeStream graph_stream(const Graph& g) {
  std::vector<EdgeUpdate> updates;
  updates.reserve(g.m());
  for (const Edge& e : g.edges())
    updates.push_back(EdgeUpdate{e.u, e.v, e.w, +1});
  return EdgeStream::from_updates(g.n(), StreamMode::insertion,
                                  std::move(updates));
}

// Insertion stream in a seed-determined order (for order-independence and
// adversarial-ordering tests).
inline EdgeStream shuffled_graph_stream(const Graph& g, std::uint64_t seed) {
  std::vector<std::uint32_t> order =
      random_permutation(static_cast<std::uint32_t>(g.m()), seed, 0);
  std::vector<EdgeUpdate> updates;
  updates.reserve(g.m());
  for (std::uint32_t i : order) {
    const Edge& e = g.edges()[i];
    updates.push_back(EdgeUpdate{e.u, e.v, e.w, +1});
  }
  return EdgeStream::from_updates(g.n(), StreamMode::insertion,
                                  std::move(updates));
}

// Dynamic stream: every edge inserted in a seed-determined order, then a
// seed-chosen fraction deleted again. The final graph is g minus the deleted
// edges; the deleted keys are reported for oracle use.
inline EdgeStream deletion_stream(const Graph& g, double delete_fraction,
                                  std::uint64_t seed,
                                  std::vector<std::uint64_t>* deleted_keys = nullptr) {
  if (delete_fraction < 0.0 || delete_fraction >= 1.0)
    throw invalid_input("deletion_stream: fraction must lie in [0,1)");
  std::vector<std::uint32_t> order =
      random_permutation(static_cast<std::uint32_t>(g.m()), seed, 0);
  std::vector<EdgeUpdate> updates;
  updates.reserve(g.m() * 2);
  for (std::uint32_t i : order) {
    const Edge& e = g.edges()[i];
    updates.push_back(EdgeUpdate{e.u, e.v, e.w, +1});
  }
  const std::size_t deletions =
      static_cast<std::size_t>(delete_fraction * static_cast<double>(g.m()));
  std::vector<std::uint32_t> victims =
      random_permutation(static_cast<std::uint32_t>(g.m()), seed, 1);
  for (std::size_t i = 0; i < deletions; ++i) {
    const Edge& e = g.edges()[victims[i]];
    updates.push_back(EdgeUpdate{e.u, e.v, e.w, -1});
    if (deleted_keys != nullptr)
      deleted_keys->push_back(pair_rank(e.u, e.v, g.n()));
  }
  return EdgeStream::from_updates(g.n(), StreamMode::dynamic,
                                  std::move(updates));
}

}  // namespace ssp
