#pragma once
// Independent reference implementations and statistical helpers for the test
// suite. These deliberately avoid the library's algorithms: distances come
// from Bellman-Ford instead of Dijkstra, bad-edge sets from a standalone
// relaxation, matchings from exhaustive recursion. Expected values frozen in
// tests were produced by these oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "ssp/graph.hpp"

namespace oracle {

// Exact single-source distances by Bellman-Ford (library uses Dijkstra).
inline std::vector<ssp::Weight> bellman_ford(const ssp::Graph& g,
                                             std::uint32_t source) {
  std::vector<ssp::Weight> dist(g.n(), ssp::INF_WEIGHT);
  dist[source] = 0;
  for (std::uint32_t round = 0; round + 1 < std::max<std::uint32_t>(g.n(), 2);
       ++round) {
    bool changed = false;
    for (const ssp::Edge& e : g.edges()) {
      if (dist[e.u] != ssp::INF_WEIGHT && dist[e.u] + e.w < dist[e.v]) {
        dist[e.v] = dist[e.u] + e.w;
        changed = true;
      }
      if (dist[e.v] != ssp::INF_WEIGHT && dist[e.v] + e.w < dist[e.u]) {
        dist[e.u] = dist[e.v] + e.w;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dist;
}

// Unweighted BFS distances over an explicit adjacency list.
inline std::vector<std::int64_t> bfs(
    const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t source) {
  std::vector<std::int64_t> dist(adj.size(), -1);
  std::vector<std::uint32_t> queue{source};
  dist[source] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    std::uint32_t u = queue[head];
    for (std::uint32_t v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

inline std::vector<std::vector<std::uint32_t>> adjacency(const ssp::Graph& g) {
  std::vector<std::vector<std::uint32_t>> adj(g.n());
  for (const ssp::Edge& e : g.edges()) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return adj;
}

// Distances from `source` inside the forest given by `edges` restricted to
// the bits of `mask`, by repeated relaxation (no tree structure assumed).
inline std::vector<ssp::Weight> masked_forest_distances(
    const std::vector<ssp::Edge>& edges, std::uint32_t mask, std::uint32_t n,
    std::uint32_t source) {
  std::vector<ssp::Weight> dist(n, ssp::INF_WEIGHT);
  dist[source] = 0;
  for (std::uint32_t round = 0; round < n; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (((mask >> i) & 1u) == 0) continue;
      const ssp::Edge& e = edges[i];
      if (dist[e.u] != ssp::INF_WEIGHT && dist[e.u] + e.w < dist[e.v]) {
        dist[e.v] = dist[e.u] + e.w;
        changed = true;
      }
      if (dist[e.v] != ssp::INF_WEIGHT && dist[e.v] + e.w < dist[e.u]) {
        dist[e.u] = dist[e.v] + e.w;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dist;
}

// Bad-edge convention shared with the library: an edge with exactly one
// endpoint unreachable is bad; both unreachable is not.
inline bool bad_under(const std::vector<ssp::Weight>& dist, const ssp::Edge& e) {
  ssp::Weight du = dist[e.u], dv = dist[e.v];
  if (du == ssp::INF_WEIGHT && dv == ssp::INF_WEIGHT) return false;
  if (du == ssp::INF_WEIGHT || dv == ssp::INF_WEIGHT) return true;
  ssp::Weight gap = du > dv ? du - dv : dv - du;
  return gap > e.w;
}

// Acyclicity of the masked edge subset, by union-find.
inline bool mask_acyclic(const std::vector<ssp::Edge>& edges, std::uint32_t mask,
                         std::uint32_t n) {
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (((mask >> i) & 1u) == 0) continue;
    std::uint32_t a = find(edges[i].u), b = find(edges[i].v);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

// Direct check of both smoothness conditions by enumerating every acyclic
// subset of the parent's edges. Candidate importances are keyed by vertex
// pair; candidate edges must appear in the parent with identical weights.
inline bool check_smoothness(const std::vector<ssp::Edge>& parent_edges,
                             const std::vector<long double>& parent_q,
                             std::uint32_t n, std::uint32_t source,
                             const std::vector<ssp::Edge>& cand_edges,
                             const std::vector<long double>& cand_q,
                             double eps) {
  long double total_q = 0.0L;
  for (long double q : parent_q) total_q += q;
  long double cand_total = 0.0L;
  for (long double q : cand_q) cand_total += q;
  const long double slack = 1e-9L * (1.0L + total_q);
  if (cand_total > (1.0L + static_cast<long double>(eps)) * total_q + slack)
    return false;

  std::map<std::pair<std::uint32_t, std::uint32_t>, long double> cand_by_pair;
  for (std::size_t i = 0; i < cand_edges.size(); ++i) {
    auto [u, v] = std::minmax(cand_edges[i].u, cand_edges[i].v);
    cand_by_pair[{u, v}] += cand_q[i];
  }

  for (std::uint32_t mask = 0; mask < (1u << parent_edges.size()); ++mask) {
    if (!mask_acyclic(parent_edges, mask, n)) continue;
    std::vector<ssp::Weight> dist =
        masked_forest_distances(parent_edges, mask, n, source);
    long double bad_parent = 0.0L, bad_cand = 0.0L;
    for (std::size_t i = 0; i < parent_edges.size(); ++i)
      if (bad_under(dist, parent_edges[i])) bad_parent += parent_q[i];
    for (std::size_t i = 0; i < cand_edges.size(); ++i)
      if (bad_under(dist, cand_edges[i])) bad_cand += cand_q[i];
    if (bad_cand <
        bad_parent - static_cast<long double>(eps) * total_q - slack)
      return false;
  }
  return true;
}

// Maximum matching size by exhaustive recursion (small inputs only).
inline std::size_t max_matching_brute(
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> chosen;
  auto rec = [&](auto&& self, std::size_t i) -> void {
    best = std::max(best, chosen.size());
    if (i >= edges.size()) return;
    self(self, i + 1);
    auto [a, b] = edges[i];
    for (auto [x, y] : chosen)
      if (x == a || y == b) return;
    chosen.push_back(edges[i]);
    self(self, i + 1);
    chosen.pop_back();
  };
  rec(rec, 0);
  return best;
}

// ---- statistics -----------------------------------------------------------

inline double total_variation(const std::vector<double>& p,
                              const std::vector<double>& q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return tv / 2.0;
}

// Standard deviation of a binomial proportion estimate over `trials` draws.
inline double proportion_sigma(double p, std::size_t trials) {
  return std::sqrt(std::max(p * (1.0 - p), 1e-12) /
                   static_cast<double>(trials));
}

// Loose sigma bound for an empirical TV distance over `support` cells and
// `trials` draws: each cell's deviation is O(sqrt(p/trials)), summed.
inline double tv_sigma(std::size_t support, std::size_t trials) {
  return std::sqrt(static_cast<double>(support) /
                   static_cast<double>(trials));
}

// Pearson chi-square statistic against a uniform null.
inline double chi_square_uniform(const std::vector<std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;
  double expected = static_cast<double>(total) / counts.size();
  double stat = 0.0;
  for (std::uint64_t c : counts) {
    double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

// Acceptance threshold for a chi-square statistic with df degrees of freedom:
// mean df, variance 2 df, normal tail at five sigmas (loose, low flake rate).
inline double chi_square_threshold(std::size_t df) {
  return static_cast<double>(df) + 5.0 * std::sqrt(2.0 * static_cast<double>(df));
}

}  // namespace oracle
