#pragma once
// One-pass multiplicative spanner: geometric weight buckets, greedy hop-rule
// admission per bucket. A stream of non-negative integer weights yields a
// subgraph with stretch at most (2k-1)(1+eps/(2k)) <= 2k-1+eps.

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ssp/common.hpp"
#include "ssp/graph.hpp"
#include "ssp/stream.hpp"

namespace ssp {

// Incremental greedy spanner. Edges are offered in stream order; each bucket
// keeps the admitted subgraph for weights within one (1+eps/(2k)) factor, and
// an edge is admitted iff its endpoints are more than 2k-1 hops apart there
// (exact bounded-hop reachability). Zero-weight edges live in a dedicated
// contracted bucket maintained as a spanning forest (union-find), since any
// zero-cycle edge has a zero-length replacement path.
class SpannerBuilder {
 public:
  SpannerBuilder(std::uint32_t n, std::uint32_t k, double eps,
                 SpaceLedger* ledger = nullptr)
      : n_(n), k_(k), eps_(eps), ledger_(ledger) {
    if (k_ < 1) throw invalid_input("spanner: k must be >= 1");
    if (!(eps_ > 0.0) || eps_ > 1.0)
      throw invalid_input("spanner: eps must lie in (0,1]");
    eps_bucket_ = eps_ / (2.0 * k_);
    log_base_ = std::log(1.0 + eps_bucket_);
    max_hops_ = 2 * k_ - 1;
    stamp_.assign(n_, 0);
    mark_.assign(n_, 0);
    queue_.reserve(n_);
    if (ledger_ != nullptr) ledger_->charge(3 * static_cast<std::size_t>(n_));
  }

  SpannerBuilder(const SpannerBuilder&) = delete;
  SpannerBuilder& operator=(const SpannerBuilder&) = delete;

  // Offers one edge; returns true iff it joins the spanner.
  bool offer(std::uint32_t u, std::uint32_t v, Weight w) {
    if (u == v) throw invalid_input("spanner: self-loop");
    if (u >= n_ || v >= n_) throw invalid_input("spanner: endpoint out of range");
    if (w == 0) return offer_zero(u, v);

    std::int64_t b = static_cast<std::int64_t>(std::log(static_cast<double>(w)) /
                                               log_base_);
    Bucket& bucket = buckets_[b];
    if (within_hops(bucket, u, v)) return false;
    bucket.adj[u].push_back(v);
    bucket.adj[v].push_back(u);
    admit(u, v, w);
    return true;
  }

  const std::vector<Edge>& edges() const { return edges_; }

  Graph graph() const { return Graph(n_, edges_); }

  // Ledger words currently held: 4 per admitted edge (edge record plus its
  // two adjacency entries), the BFS scratch arrays, and the contracted-bucket
  // forest when present.
  std::size_t words() const {
    return 4 * edges_.size() + zero_parent_.size() + stamp_.size() +
           mark_.size() + queue_.capacity();
  }

  ~SpannerBuilder() {
    if (ledger_ != nullptr) ledger_->release(words());
  }

 private:
  struct Bucket {
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> adj;
  };

  void admit(std::uint32_t u, std::uint32_t v, Weight w) {
    edges_.push_back(u < v ? Edge{u, v, w} : Edge{v, u, w});
    if (ledger_ != nullptr) ledger_->charge(4);
  }

  bool offer_zero(std::uint32_t u, std::uint32_t v) {
    if (zero_parent_.empty()) {
      zero_parent_.resize(n_);
      for (std::uint32_t i = 0; i < n_; ++i) zero_parent_[i] = i;
      if (ledger_ != nullptr) ledger_->charge(n_);
    }
    std::uint32_t ru = zero_find(u), rv = zero_find(v);
    if (ru == rv) return false;
    zero_parent_[ru] = rv;
    admit(u, v, 0);
    return true;
  }

  std::uint32_t zero_find(std::uint32_t x) {
    while (zero_parent_[x] != x) {
      zero_parent_[x] = zero_parent_[zero_parent_[x]];
      x = zero_parent_[x];
    }
    return x;
  }

  // Exact test: is v reachable from u in at most max_hops_ bucket edges?
  // Marks N(v) first, then explores from u to depth max_hops_ - 1, so the
  // common dense-graph rejection (a short meeting path) exits early.
  bool within_hops(const Bucket& bucket, std::uint32_t u, std::uint32_t v) {
    auto su = bucket.adj.find(u);
    if (su == bucket.adj.end()) return false;
    auto sv = bucket.adj.find(v);
    if (sv == bucket.adj.end()) return false;

    ++epoch_;
    for (std::uint32_t y : sv->second) {
      if (y == u) return true;  // direct edge already admitted
      mark_[y] = epoch_;
    }
    if (max_hops_ == 1) return false;

    queue_.clear();
    queue_.push_back(u);
    stamp_[u] = epoch_;
    std::uint32_t depth = 0;
    std::size_t layer_end = queue_.size();
    // Invariant: reaching a marked vertex at depth d gives a u-v path of
    // d+1 <= max_hops_ edges.
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      if (head == layer_end) {
        ++depth;
        layer_end = queue_.size();
      }
      std::uint32_t x = queue_[head];
      if (mark_[x] == epoch_) return true;
      if (depth + 1 >= max_hops_) continue;  // children would exceed the cap
      auto it = bucket.adj.find(x);
      if (it == bucket.adj.end()) continue;
      for (std::uint32_t y : it->second) {
        if (stamp_[y] == epoch_) continue;
        if (mark_[y] == epoch_) return true;
        stamp_[y] = epoch_;
        queue_.push_back(y);
      }
    }
    return false;
  }

  std::uint32_t n_, k_;
  double eps_, eps_bucket_, log_base_;
  std::uint32_t max_hops_;
  SpaceLedger* ledger_;
  std::unordered_map<std::int64_t, Bucket> buckets_;
  std::vector<std::uint32_t> zero_parent_;
  std::vector<Edge> edges_;
  std::vector<std::uint64_t> stamp_, mark_;
  std::vector<std::uint32_t> queue_;
  std::uint64_t epoch_ = 0;
};

// One metered pass producing the spanner of an insertion stream.
inline Graph streaming_spanner(EdgeStream& stream, std::uint32_t k, double eps,
                               SpaceLedger* ledger = nullptr) {
  if (stream.mode() != StreamMode::insertion)
    throw invalid_input("streaming_spanner: insertion streams only");
  SpannerBuilder builder(stream.n(), k, eps, ledger);
  {
    auto pass = stream.begin_pass();
    for (const EdgeUpdate& e : pass) builder.offer(e.u, e.v, e.w);
  }
  return builder.graph();
}

struct StretchReport {
  bool ok = true;
  double max_stretch = 0.0;  // worst dist_h / dist_g over connected pairs
};

// All-pairs stretch check: h must be a subgraph of g (as a pair set) and
// every g-distance may grow by at most a (2k-1+eps) factor in h.
inline StretchReport verify_stretch(const Graph& g, const Graph& h,
                                    std::uint32_t k, double eps) {
  for (const Edge& e : h.edges())
    if (!g.has_edge(e.u, e.v))
      throw invalid_input("verify_stretch: spanner edge not in parent graph");
  const double bound = 2.0 * k - 1.0 + eps;
  StretchReport rep;
  for (std::uint32_t s = 0; s < g.n(); ++s) {
    ShortestPathTree tg = shortest_path_tree(g, s);
    ShortestPathTree th = shortest_path_tree(h, s);
    for (std::uint32_t v = 0; v < g.n(); ++v) {
      if (tg.dist[v] == INF_WEIGHT || v == s) continue;
      if (th.dist[v] == INF_WEIGHT) {
        rep.ok = false;
        rep.max_stretch = std::numeric_limits<double>::infinity();
        return rep;
      }
      if (tg.dist[v] == 0) {
        if (th.dist[v] != 0) {
          rep.ok = false;
          rep.max_stretch = std::numeric_limits<double>::infinity();
          return rep;
        }
        continue;
      }
      double stretch = static_cast<double>(th.dist[v]) /
                       static_cast<double>(tg.dist[v]);
      rep.max_stretch = std::max(rep.max_stretch, stretch);
      if (stretch > bound) rep.ok = false;
    }
  }
  return rep;
}

}  // namespace ssp
