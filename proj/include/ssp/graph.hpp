#pragma once
// Weighted undirected graphs, shortest-path trees, and deterministic Dijkstra.

#include <cstdint>
#include <queue>
#include <tuple>
#include <vector>

#include "ssp/common.hpp"

namespace ssp {

struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  Weight w = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected graph over vertices [0, n). Edges are stored canonically
// (u < v, sorted, duplicates collapsed to the minimum weight).
class Graph {
 public:
  Graph() = default;

  Graph(std::uint32_t n, std::vector<Edge> edges) : n_(n) {
    for (Edge& e : edges) {
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.u == e.v) throw invalid_input("Graph: self-loops are not allowed");
      if (e.v >= n_) throw invalid_input("Graph: endpoint out of range");
      if (e.w > MAX_EDGE_WEIGHT) throw invalid_input("Graph: weight above 2^40");
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.u, a.v, a.w) < std::tie(b.u, b.v, b.w);
    });
    edges_.reserve(edges.size());
    for (const Edge& e : edges) {
      if (!edges_.empty() && edges_.back().u == e.u && edges_.back().v == e.v)
        continue;  // duplicate pair: the sort put the minimum weight first
      edges_.push_back(e);
    }
    build_adjacency();
  }

  std::uint32_t n() const { return n_; }
  std::size_t m() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  // Neighbors of u as (other endpoint, weight) pairs.
  struct Arc {
    std::uint32_t to;
    Weight w;
  };
  const Arc* arcs_begin(std::uint32_t u) const { return arcs_.data() + offs_[u]; }
  const Arc* arcs_end(std::uint32_t u) const { return arcs_.data() + offs_[u + 1]; }

  bool has_edge(std::uint32_t u, std::uint32_t v) const {
    if (u > v) std::swap(u, v);
    Edge probe{u, v, 0};
    auto it = std::lower_bound(
        edges_.begin(), edges_.end(), probe, [](const Edge& a, const Edge& b) {
          return std::tie(a.u, a.v) < std::tie(b.u, b.v);
        });
    return it != edges_.end() && it->u == u && it->v == v;
  }

 private:
  void build_adjacency() {
    offs_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) {
      ++offs_[e.u + 1];
      ++offs_[e.v + 1];
    }
    for (std::uint32_t i = 0; i < n_; ++i) offs_[i + 1] += offs_[i];
    arcs_.resize(2 * edges_.size());
    std::vector<std::uint32_t> cursor(offs_.begin(), offs_.end() - 1);
    for (const Edge& e : edges_) {
      arcs_[cursor[e.u]++] = Arc{e.v, e.w};
      arcs_[cursor[e.v]++] = Arc{e.u, e.w};
    }
  }

  std::uint32_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> offs_{0};
  std::vector<Arc> arcs_;
};

constexpr std::uint32_t NO_PARENT = 0xffffffffu;

// Rooted shortest-path tree: per-vertex distance and parent. Unreachable
// vertices carry INF_WEIGHT distance and NO_PARENT.
struct ShortestPathTree {
  std::uint32_t source = 0;
  std::vector<Weight> dist;
  std::vector<std::uint32_t> parent;

  Weight distance(std::uint32_t v) const { return dist[v]; }

  // Ledger words: one per distance entry plus one per parent entry.
  std::size_t words() const { return dist.size() + parent.size(); }

  friend bool operator==(const ShortestPathTree&, const ShortestPathTree&) = default;
};

// Dijkstra with deterministic tie-breaking: among equal-distance predecessors
// the smallest vertex id becomes the parent.
inline ShortestPathTree shortest_path_tree(const Graph& g, std::uint32_t source) {
  if (source >= g.n()) throw invalid_input("shortest_path_tree: bad source");
  ShortestPathTree t;
  t.source = source;
  t.dist.assign(g.n(), INF_WEIGHT);
  t.parent.assign(g.n(), NO_PARENT);
  t.dist[source] = 0;

  using Item = std::pair<Weight, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.emplace(0, source);
  std::vector<bool> done(g.n(), false);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = true;
    for (const Graph::Arc* a = g.arcs_begin(u); a != g.arcs_end(u); ++a) {
      Weight nd = d + a->w;
      if (nd < t.dist[a->to]) {
        t.dist[a->to] = nd;
        t.parent[a->to] = u;
        heap.emplace(nd, a->to);
      } else if (nd == t.dist[a->to] && !done[a->to] && u < t.parent[a->to]) {
        // Equal distance: smallest predecessor id wins. Restricting the update
        // to non-finalized vertices keeps parents acyclic when zero-weight
        // edges put several vertices at the same distance.
        t.parent[a->to] = u;
      }
    }
  }
  return t;
}

// Edges actually used by the tree (weights reconstructed from distances).
inline std::vector<Edge> tree_edges(const ShortestPathTree& t) {
  std::vector<Edge> out;
  for (std::uint32_t v = 0; v < t.parent.size(); ++v) {
    if (t.parent[v] == NO_PARENT) continue;
    std::uint32_t p = t.parent[v];
    Weight w = t.dist[v] - t.dist[p];
    out.push_back(p < v ? Edge{p, v, w} : Edge{v, p, w});
  }
  return out;
}

// Structural validity of a claimed shortest-path tree with respect to g:
// the root is at distance 0, every parent edge exists in g with a weight
// consistent with the distance labels, and no g-edge can shortcut a label.
inline bool check_tree_invariants(const Graph& g, const ShortestPathTree& t) {
  if (t.dist.size() != g.n() || t.parent.size() != g.n()) return false;
  if (t.dist[t.source] != 0 || t.parent[t.source] != NO_PARENT) return false;
  for (std::uint32_t v = 0; v < g.n(); ++v) {
    if (v == t.source) continue;
    if ((t.dist[v] == INF_WEIGHT) != (t.parent[v] == NO_PARENT)) return false;
    if (t.parent[v] == NO_PARENT) continue;
    std::uint32_t p = t.parent[v];
    if (t.dist[p] == INF_WEIGHT || t.dist[v] < t.dist[p]) return false;
    Weight w = t.dist[v] - t.dist[p];
    bool found = false;
    for (const Graph::Arc* a = g.arcs_begin(v); a != g.arcs_end(v); ++a)
      if (a->to == p && a->w == w) found = true;
    if (!found) return false;
  }
  for (const Edge& e : g.edges()) {
    if (t.dist[e.u] != INF_WEIGHT && t.dist[e.v] > t.dist[e.u] + e.w) return false;
    if (t.dist[e.v] != INF_WEIGHT && t.dist[e.u] > t.dist[e.v] + e.w) return false;
  }
  return true;
}

// Union of two graphs on the same vertex set; duplicate pairs keep the
// minimum weight.
inline Graph union_graphs(const Graph& a, const Graph& b) {
  if (a.n() != b.n()) throw invalid_input("union_graphs: vertex counts differ");
  std::vector<Edge> edges = a.edges();
  edges.insert(edges.end(), b.edges().begin(), b.edges().end());
  return Graph(a.n(), std::move(edges));
}

}  // namespace ssp
