#pragma once
// Layered pointer-chasing instances and their combinatorial companions:
// products, joins, paired-pointer-chasing (PPC) samplers and their t-fold OR,
// collection graphs, and rook sets with maximum-matching extraction. These
// serve as adversarial benchmark generators and as executable checks of the
// distance dichotomy (aligned instances force distance exactly 2d-1; fully
// random ones keep the endpoints far apart with high probability).
//
// Indices are 0-based throughout: layers run 0..d-1, positions 0..w-1, and
// the collection-graph vertex for layer i, position l is i*w + l
// (layer-major). External write-ups often state the same objects 1-based.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ssp/common.hpp"
#include "ssp/graph.hpp"

namespace ssp {

// d layers of w vertices; matchings[i] is a permutation sending layer-i
// position j to layer-(i+1) position matchings[i][j].
struct LayeredGraph {
  std::uint32_t d = 2;
  std::uint32_t w = 1;
  std::vector<std::vector<std::uint32_t>> matchings;

  void validate() const {
    if (d < 2) throw invalid_input("layered graph: at least 2 layers");
    if (w < 1) throw invalid_input("layered graph: width at least 1");
    if (matchings.size() != d - 1)
      throw invalid_input("layered graph: need d-1 matchings");
    std::vector<bool> hit(w);
    for (const std::vector<std::uint32_t>& m : matchings) {
      if (m.size() != w)
        throw invalid_input("layered graph: matching width mismatch");
      hit.assign(w, false);
      for (std::uint32_t x : m) {
        if (x >= w || hit[x])
          throw invalid_input("layered graph: matching is not a bijection");
        hit[x] = true;
      }
    }
  }
};

// Pointer chase: the unique last-layer position reachable from position j of
// the first layer.
inline std::uint32_t point(const LayeredGraph& g, std::uint32_t j) {
  if (j >= g.w) throw invalid_input("point: start position out of range");
  for (const std::vector<std::uint32_t>& m : g.matchings) j = m[j];
  return j;
}

inline std::vector<std::uint32_t> identity_permutation(std::uint32_t w) {
  std::vector<std::uint32_t> p(w);
  for (std::uint32_t i = 0; i < w; ++i) p[i] = i;
  return p;
}

inline std::vector<std::uint32_t> invert_permutation(
    const std::vector<std::uint32_t>& p) {
  std::vector<std::uint32_t> inv(p.size());
  for (std::uint32_t i = 0; i < p.size(); ++i) inv[p[i]] = i;
  return inv;
}

// Uniform permutation of [0, w) by Fisher-Yates; one counter-based draw per
// swap, so the same (seed, id) always yields the same permutation.
inline std::vector<std::uint32_t> random_permutation(std::uint32_t w,
                                                     std::uint64_t seed,
                                                     std::uint64_t id) {
  std::vector<std::uint32_t> p = identity_permutation(w);
  for (std::uint32_t i = w; i > 1; --i) {
    std::uint32_t j =
        static_cast<std::uint32_t>(prf(seed, TAG_PERM, id, i) % i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

// Product graph over width w*w: position (x, y) is encoded as x*w + y and
// chased componentwise, so point factorizes across the two factors.
inline LayeredGraph product(const LayeredGraph& g1, const LayeredGraph& g2) {
  if (g1.d != g2.d || g1.w != g2.w)
    throw invalid_input("product: shape mismatch");
  LayeredGraph out;
  out.d = g1.d;
  out.w = g1.w * g1.w;
  out.matchings.resize(out.d - 1);
  for (std::uint32_t i = 0; i + 1 < out.d; ++i) {
    out.matchings[i].resize(out.w);
    for (std::uint32_t x = 0; x < g1.w; ++x)
      for (std::uint32_t y = 0; y < g1.w; ++y)
        out.matchings[i][x * g1.w + y] =
            g1.matchings[i][x] * g1.w + g2.matchings[i][y];
  }
  return out;
}

// Join graph over 2d layers: g1 is laid out as layers 0..d-1, the middle
// matching is the identity, and g2 follows with its layers reversed (so its
// matchings appear inverted, last first). The chase from position i returns
// to position i if and only if point(g1, i) = point(g2, i).
inline LayeredGraph join(const LayeredGraph& g1, const LayeredGraph& g2) {
  if (g1.d != g2.d || g1.w != g2.w)
    throw invalid_input("join: shape mismatch");
  LayeredGraph out;
  out.d = 2 * g1.d;
  out.w = g1.w;
  out.matchings.reserve(out.d - 1);
  for (const std::vector<std::uint32_t>& m : g1.matchings)
    out.matchings.push_back(m);
  out.matchings.push_back(identity_permutation(out.w));
  for (auto it = g2.matchings.rbegin(); it != g2.matchings.rend(); ++it)
    out.matchings.push_back(invert_permutation(*it));
  return out;
}

// Paired pointer chasing: two layered graphs of the same shape and the bit
// recording whether their chases from position 0 were forced to agree.
struct PPCInstance {
  LayeredGraph g1;
  LayeredGraph g2;
  bool b = false;
};

// b = 0: all 2(d-1) matchings uniform and independent. b = 1: g1 uniform,
// g2's first d-2 matchings uniform, and g2's last matching uniform among
// permutations sending the current chase position to point(g1, 0). By
// symmetry this equals the uniform distribution conditioned on chase
// agreement, without rejection sampling.
inline PPCInstance sample_ppc(bool b, std::uint32_t d, std::uint32_t w,
                              std::uint64_t seed) {
  if (d < 2 || w < 2) throw invalid_input("sample_ppc: need d, w >= 2");
  PPCInstance inst;
  inst.b = b;
  inst.g1.d = inst.g2.d = d;
  inst.g1.w = inst.g2.w = w;
  for (std::uint32_t i = 0; i + 1 < d; ++i)
    inst.g1.matchings.push_back(random_permutation(w, seed, i));
  if (!b) {
    for (std::uint32_t i = 0; i + 1 < d; ++i)
      inst.g2.matchings.push_back(random_permutation(w, seed, (d - 1) + i));
    return inst;
  }
  std::uint32_t chase = 0;
  for (std::uint32_t i = 0; i + 2 < d; ++i) {
    inst.g2.matchings.push_back(random_permutation(w, seed, (d - 1) + i));
    chase = inst.g2.matchings.back()[chase];
  }
  const std::uint32_t target = point(inst.g1, 0);
  // Uniform completion with the one forced value: a uniform bijection
  // between the remaining w-1 sources and w-1 targets.
  std::vector<std::uint32_t> last(w);
  last[chase] = target;
  std::vector<std::uint32_t> src, dst;
  src.reserve(w - 1);
  dst.reserve(w - 1);
  for (std::uint32_t i = 0; i < w; ++i) {
    if (i != chase) src.push_back(i);
    if (i != target) dst.push_back(i);
  }
  std::vector<std::uint32_t> pi = random_permutation(w - 1, seed, 2 * d);
  for (std::uint32_t i = 0; i + 1 < w; ++i) last[src[i]] = dst[pi[i]];
  inst.g2.matchings.push_back(std::move(last));
  return inst;
}

struct OrPpcSample {
  std::vector<PPCInstance> instances;
  std::optional<std::uint32_t> aligned_index;  // set only when b = 1
};

// t-fold OR of PPC: b = 1 plants one aligned instance at a uniformly random
// index and fills the rest with fully random ones; b = 0 is all random.
inline OrPpcSample sample_or_ppc(bool b, std::uint32_t t, std::uint32_t d,
                                 std::uint32_t w, std::uint64_t seed) {
  if (t < 1) throw invalid_input("sample_or_ppc: need t >= 1");
  OrPpcSample out;
  out.instances.reserve(t);
  if (b)
    out.aligned_index = static_cast<std::uint32_t>(
        prf(seed, TAG_PPC, t, 1) % t);
  for (std::uint32_t i = 0; i < t; ++i) {
    bool aligned = out.aligned_index.has_value() && *out.aligned_index == i;
    out.instances.push_back(
        sample_ppc(aligned, d, w, prf(seed, TAG_PPC, i, 0)));
  }
  return out;
}

// Edge union of the joined instances: an unweighted graph on 2dw vertices,
// vertex i*w + l for layer i, position l. Coinciding matching edges collapse
// (plain edge union).
inline Graph collection_graph(const std::vector<PPCInstance>& instances) {
  if (instances.empty())
    throw invalid_input("collection_graph: need at least one instance");
  const std::uint32_t d = instances.front().g1.d;
  const std::uint32_t w = instances.front().g1.w;
  std::vector<Edge> edges;
  for (const PPCInstance& inst : instances) {
    if (inst.g1.d != d || inst.g1.w != w || inst.g2.d != d || inst.g2.w != w)
      throw invalid_input("collection_graph: shape mismatch");
    LayeredGraph j = join(inst.g1, inst.g2);
    for (std::uint32_t layer = 0; layer + 1 < j.d; ++layer)
      for (std::uint32_t l = 0; l < w; ++l)
        edges.push_back(Edge{layer * w + l,
                             (layer + 1) * w + j.matchings[layer][l], 1});
  }
  return Graph(2 * d * w, std::move(edges));
}

// Distance between the chase start (layer 0, position 0) and its aligned
// last-layer vertex (layer 2d-1, position 0) in the collection graph,
// computed by bounded breadth-first search straight from the matchings.
// Returns the distance if it is at most cap, otherwise nullopt. Vertex
// degrees are at most 2t, so the search touches O((2t)^cap) vertices and the
// collection graph itself is never materialized.
inline std::optional<std::uint32_t> chase_distance(
    const std::vector<PPCInstance>& instances, std::uint32_t cap) {
  if (instances.empty())
    throw invalid_input("chase_distance: need at least one instance");
  const std::uint32_t d = instances.front().g1.d;
  const std::uint32_t w = instances.front().g1.w;
  struct JoinArrows {
    std::vector<std::vector<std::uint32_t>> fwd, bwd;
  };
  std::vector<JoinArrows> arrows;
  arrows.reserve(instances.size());
  for (const PPCInstance& inst : instances) {
    if (inst.g1.d != d || inst.g1.w != w || inst.g2.d != d || inst.g2.w != w)
      throw invalid_input("chase_distance: shape mismatch");
    LayeredGraph j = join(inst.g1, inst.g2);
    JoinArrows a;
    a.fwd = std::move(j.matchings);
    a.bwd.reserve(a.fwd.size());
    for (const std::vector<std::uint32_t>& m : a.fwd)
      a.bwd.push_back(invert_permutation(m));
    arrows.push_back(std::move(a));
  }

  const std::uint32_t layers = 2 * d;
  const std::uint32_t start = 0;
  const std::uint32_t goal = (layers - 1) * w + 0;
  std::unordered_map<std::uint32_t, std::uint32_t> dist;
  std::queue<std::uint32_t> queue;
  dist.emplace(start, 0);
  queue.push(start);
  while (!queue.empty()) {
    std::uint32_t x = queue.front();
    queue.pop();
    std::uint32_t dx = dist.at(x);
    if (x == goal) return dx;
    if (dx == cap) continue;
    std::uint32_t layer = x / w, pos = x % w;
    auto visit = [&](std::uint32_t y) {
      if (dist.emplace(y, dx + 1).second) queue.push(y);
    };
    for (const JoinArrows& a : arrows) {
      if (layer + 1 < layers) visit((layer + 1) * w + a.fwd[layer][pos]);
      if (layer > 0) visit((layer - 1) * w + a.bwd[layer - 1][pos]);
    }
  }
  return std::nullopt;
}

// Parameters (t, d, w) for building a hard collection instance on n
// vertices with p passes and approximation slack alpha: d = p + 2 exactly,
// w = floor(n / (2(p+2))), t = floor(n^{1 / (4 alpha (p+2))}).
struct LemmaParams {
  std::uint64_t t = 0;
  std::uint32_t d = 0;
  std::uint64_t w = 0;
  std::string rounding;  // which fields were rounded down, and from what
};

inline LemmaParams lemma_params(std::uint64_t n, std::uint32_t p,
                                double alpha) {
  if (n < 2) throw invalid_input("lemma_params: n must be >= 2");
  if (!(alpha > 0.0)) throw invalid_input("lemma_params: alpha must be positive");
  const double bound = std::log2(static_cast<double>(n)) / (4.0 * alpha) - 2.0;
  if (static_cast<double>(p) > bound + 1e-9)
    throw invalid_input("lemma_params: p exceeds log2(n)/(4 alpha) - 2");
  LemmaParams out;
  out.d = p + 2;
  const double exact_w = static_cast<double>(n) / (2.0 * out.d);
  const double exact_t =
      std::pow(static_cast<double>(n), 1.0 / (4.0 * alpha * out.d));
  // Tiny slack so exact powers (e.g. 65536^(1/16) = 2) survive the floor.
  out.w = static_cast<std::uint64_t>(exact_w + 1e-9);
  out.t = static_cast<std::uint64_t>(exact_t + 1e-9);
  out.rounding = "d exact; w down from " + std::to_string(exact_w) +
                 "; t down from " + std::to_string(exact_t);
  return out;
}

using IndexPair = std::pair<std::uint32_t, std::uint32_t>;

// True iff no two pairs share a first coordinate and no two share a second.
inline bool is_rook_set(const std::vector<IndexPair>& pairs) {
  std::unordered_set<std::uint32_t> rows, cols;
  for (const IndexPair& p : pairs) {
    if (!rows.insert(p.first).second) return false;
    if (!cols.insert(p.second).second) return false;
  }
  return true;
}

// Maximum-cardinality rook subset of the given pairs: pairs are edges of a
// bipartite graph (first coordinates vs. second coordinates) and rook sets
// are exactly its matchings, found by augmenting paths.
inline std::vector<IndexPair> find_rook_subset(
    const std::vector<IndexPair>& pairs) {
  // Dedup and group by first coordinate.
  std::vector<IndexPair> uniq = pairs;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<std::uint32_t> rows;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> adj;
  for (const IndexPair& p : uniq) {
    auto [it, inserted] = adj.try_emplace(p.first);
    if (inserted) rows.push_back(p.first);
    it->second.push_back(p.second);
  }

  std::unordered_map<std::uint32_t, std::uint32_t> col_match;  // col -> row
  std::unordered_set<std::uint32_t> visited;
  std::function<bool(std::uint32_t)> augment = [&](std::uint32_t row) -> bool {
    for (std::uint32_t col : adj.at(row)) {
      if (!visited.insert(col).second) continue;
      auto it = col_match.find(col);
      if (it == col_match.end() || augment(it->second)) {
        col_match[col] = row;
        return true;
      }
    }
    return false;
  };
  for (std::uint32_t row : rows) {
    visited.clear();
    augment(row);
  }

  std::vector<IndexPair> out;
  out.reserve(col_match.size());
  for (const auto& [col, row] : col_match) out.emplace_back(row, col);
  std::sort(out.begin(), out.end());
  return out;
}

// Extends a rook set with `target` diagonal pairs (i, i), skipping the at
// most 2|base| diagonal positions whose row or column the base already
// uses. The union stays a rook set.
inline std::vector<IndexPair> extend_with_diagonal(
    const std::vector<IndexPair>& base, std::uint32_t w, std::uint32_t target) {
  if (!is_rook_set(base))
    throw invalid_input("extend_with_diagonal: base is not a rook set");
  std::unordered_set<std::uint32_t> used;
  for (const IndexPair& p : base) {
    if (p.first >= w || p.second >= w)
      throw invalid_input("extend_with_diagonal: coordinate out of range");
    used.insert(p.first);
    used.insert(p.second);
  }
  if (target < base.size())
    throw invalid_input("extend_with_diagonal: target below base size");
  std::vector<IndexPair> out = base;
  std::uint32_t added = 0;
  for (std::uint32_t i = 0; i < w && added < target; ++i) {
    if (used.count(i)) continue;
    out.emplace_back(i, i);
    ++added;
  }
  if (added < target)
    throw invalid_input("extend_with_diagonal: insufficient surviving diagonal slots");
  return out;
}

// `count` distinct off-diagonal pairs drawn uniformly without replacement
// from [k] x [k] minus the diagonal (the random bipartite model behind the
// rook-subset frequency bound).
inline std::vector<IndexPair> sample_offdiagonal_pairs(std::uint32_t k,
                                                       std::uint32_t count,
                                                       std::uint64_t seed) {
  const std::uint64_t universe =
      static_cast<std::uint64_t>(k) * k - k;
  if (count > universe)
    throw invalid_input("sample_offdiagonal_pairs: count exceeds universe");
  std::unordered_set<std::uint64_t> seen;
  std::vector<IndexPair> out;
  out.reserve(count);
  std::uint64_t draw = 0;
  while (out.size() < count) {
    std::uint64_t code = prf(seed, TAG_GRAPH_GEN, 2, draw++) % universe;
    std::uint32_t a = static_cast<std::uint32_t>(code / (k - 1));
    std::uint32_t rest = static_cast<std::uint32_t>(code % (k - 1));
    std::uint32_t b = rest >= a ? rest + 1 : rest;  // skip the diagonal
    std::uint64_t key = static_cast<std::uint64_t>(a) * k + b;
    if (!seen.insert(key).second) continue;
    out.emplace_back(a, b);
  }
  return out;
}

}  // namespace ssp
