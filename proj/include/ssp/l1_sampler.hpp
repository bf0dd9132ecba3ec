#pragma once
// (eps, delta) l1 samplers for turnstile vectors, and banks of independently
// seeded samplers.
//
// The sketch is linear: cells hold (signed count, index-weighted sum mod
// 2^61-1, fingerprint mod 2^61-1), so an insertion followed by the matching
// deletion restores the state exactly. Small dimensions (or loose eps) get
// one exact cell per coordinate, which makes recovery deterministic and the
// output distribution exactly |x_i| / ||x||_1. Large dimensions use nested
// geometric subsampling levels, each with a two-row bucket array decoded by
// fingerprint-verified peeling; if only a subsampled level decodes, the draw
// is accepted with probability ||x_S||_1 / ||x||_1, which keeps every
// coordinate's unconditional return probability proportional to its weight.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ssp/common.hpp"

namespace ssp {

inline constexpr std::uint64_t M61 = (std::uint64_t{1} << 61) - 1;

inline std::uint64_t add61(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + b;
  if (s >= M61) s -= M61;
  return s;
}

inline std::uint64_t sub61(std::uint64_t a, std::uint64_t b) {
  return a >= b ? a - b : a + M61 - b;
}

inline std::uint64_t mul61(std::uint64_t a, std::uint64_t b) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  std::uint64_t lo = static_cast<std::uint64_t>(p & M61);
  std::uint64_t hi = static_cast<std::uint64_t>(p >> 61);
  return add61(lo, hi);
}

inline std::uint64_t pow61(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t acc = 1;
  while (exp != 0) {
    if (exp & 1) acc = mul61(acc, base);
    base = mul61(base, base);
    exp >>= 1;
  }
  return acc;
}

inline std::uint64_t inv61(std::uint64_t a) { return pow61(a, M61 - 2); }

inline std::uint64_t to61(std::int64_t v) {
  std::int64_t r = v % static_cast<std::int64_t>(M61);
  if (r < 0) r += static_cast<std::int64_t>(M61);
  return static_cast<std::uint64_t>(r);
}

class L1Sampler {
 public:
  // Dimensions at or below this threshold store one exact cell per
  // coordinate, so a query never fails on a nonzero vector.
  static constexpr std::uint64_t DENSE_CUTOFF = 1024;

  L1Sampler(std::uint64_t dim, double eps, double delta, std::uint64_t seed)
      : dim_(dim), eps_(eps), delta_(delta), seed_(seed) {
    if (dim_ == 0) throw invalid_input("l1 sampler: dim must be positive");
    if (!(eps_ > 0.0) || eps_ >= 1.0)
      throw invalid_input("l1 sampler: eps must lie in (0,1)");
    if (!(delta_ > 0.0) || delta_ >= 1.0)
      throw invalid_input("l1 sampler: delta must lie in (0,1)");

    std::uint64_t s_formula = static_cast<std::uint64_t>(
        std::ceil((2.0 / eps_) * std::log2(2.0 + 1.0 / eps_)));
    if (s_formula < 4) s_formula = 4;
    dense_ = dim_ <= std::max(DENSE_CUTOFF, s_formula);
    if (dense_) {
      levels_ = 1;
      reps_ = 1;
      rows_ = 1;
      buckets_ = dim_;
    } else {
      levels_ = static_cast<std::uint32_t>(
                    std::ceil(std::log2(static_cast<double>(dim_)))) +
                1;
      reps_ = std::max<std::uint32_t>(
          1, static_cast<std::uint32_t>(std::ceil(std::log2(1.0 / delta_))));
      rows_ = 2;
      buckets_ = 2 * s_formula;
    }
    cells_.assign(static_cast<std::size_t>(reps_) * levels_ * rows_ * buckets_,
                  Cell{});
    touched_.assign(cells_.size(), 0);
  }

  std::uint64_t dim() const { return dim_; }
  double eps() const { return eps_; }
  double delta() const { return delta_; }

  // Fresh sketch under a new seed, reusing the allocation.
  void reset(std::uint64_t seed) {
    for (std::uint32_t off : dirty_) {
      cells_[off] = Cell{};
      touched_[off] = 0;
    }
    dirty_.clear();
    w_sum_ = 0;
    query_counter_ = 0;
    seed_ = seed;
  }

  void update(std::uint64_t i, std::int64_t delta) {
    if (i >= dim_) throw invalid_input("l1 sampler: coordinate out of range");
    if (delta == 0) return;
    w_sum_ += delta;
    std::uint64_t d61 = to61(delta);
    if (dense_) {
      apply(static_cast<std::size_t>(i), i, delta, d61);
      return;
    }
    for (std::uint32_t rep = 0; rep < reps_; ++rep) {
      std::uint32_t top = level_of(rep, i);
      for (std::uint32_t lvl = 0; lvl <= top; ++lvl)
        for (std::uint32_t row = 0; row < rows_; ++row)
          apply(flat(rep, lvl, row, bucket_of(rep, lvl, row, i)), i, delta, d61);
    }
  }

  // Sampled coordinate, or nullopt for FAIL (always FAIL on the zero vector).
  std::optional<std::uint64_t> query() {
    if (dense_) {
      std::vector<std::pair<std::uint64_t, std::int64_t>> nz;
      nz.reserve(dirty_.size());
      for (std::uint32_t off : dirty_)
        if (cells_[off].count != 0)
          nz.emplace_back(off, cells_[off].count);
      if (nz.empty()) return std::nullopt;
      std::sort(nz.begin(), nz.end());
      return pick(nz);
    }
    for (std::uint32_t rep = 0; rep < reps_; ++rep) {
      for (std::uint32_t lvl = 0; lvl < levels_; ++lvl) {
        auto dec = decode(rep, lvl);
        if (!dec.has_value()) continue;
        if (dec->empty()) {
          if (lvl == 0) return std::nullopt;  // full vector decoded as zero
          continue;
        }
        std::uint64_t i = pick(*dec);
        if (lvl == 0) return i;  // exact recovery of the whole vector
        // Subsampled survivor set: accept with ||x_S||_1 / ||x||_1 so the
        // unconditional probability of every coordinate stays proportional.
        unsigned __int128 x_s = 0;
        for (const auto& [idx, val] : *dec) x_s += magnitude(val);
        unsigned __int128 w = w_sum_ < 0
                                  ? static_cast<unsigned __int128>(-(w_sum_ + 1)) + 1
                                  : static_cast<unsigned __int128>(w_sum_);
        if (x_s >= w) return i;
        long double ratio = static_cast<long double>(x_s) /
                            static_cast<long double>(w);
        if (u01(prf(seed_, TAG_SAMPLER_QUERY, query_counter_++, 1)) <
            static_cast<double>(ratio))
          return i;
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  bool dense() const { return dense_; }

  // Snapshot of the dense-regime magnitude profile: the sorted nonzero
  // coordinates with their running |value| prefix sums. draw(seed) returns
  // exactly what a fresh sampler under that seed would return from query()
  // after the same updates, so a bank over a dense-regime vector can build
  // the profile once and answer per-sampler draws in O(log nnz).
  struct DenseProfile {
    std::vector<std::uint64_t> idx;
    std::vector<unsigned __int128> prefix;  // inclusive prefix of magnitudes

    std::optional<std::uint64_t> draw(std::uint64_t seed) const {
      if (idx.empty()) return std::nullopt;
      long double target =
          static_cast<long double>(u01(prf(seed, TAG_SAMPLER_QUERY, 0, 0))) *
          static_cast<long double>(prefix.back());
      // Leftmost entry whose cast prefix exceeds the target; the cast is
      // monotone, so binary search agrees with the sequential CDF walk.
      std::size_t lo = 0, hi = idx.size();
      while (lo < hi) {
        std::size_t mid = lo + (hi - lo) / 2;
        if (static_cast<long double>(prefix[mid]) > target)
          hi = mid;
        else
          lo = mid + 1;
      }
      return lo < idx.size() ? idx[lo] : idx.back();
    }

    std::size_t words() const { return 3 * idx.size(); }
  };

  // Dense regime only; a fresh-sampler query draws with query counter 0,
  // which is what DenseProfile::draw replays.
  DenseProfile dense_profile() const {
    if (!dense_) throw runtime_failure("dense_profile: sparse-regime sampler");
    std::vector<std::pair<std::uint64_t, std::int64_t>> nz;
    nz.reserve(dirty_.size());
    for (std::uint32_t off : dirty_)
      if (cells_[off].count != 0) nz.emplace_back(off, cells_[off].count);
    std::sort(nz.begin(), nz.end());
    DenseProfile p;
    p.idx.reserve(nz.size());
    p.prefix.reserve(nz.size());
    unsigned __int128 acc = 0;
    for (const auto& [i, val] : nz) {
      acc += magnitude(val);
      p.idx.push_back(i);
      p.prefix.push_back(acc);
    }
    return p;
  }

  // Logical sketch equality: parameters, accumulator, and cell contents.
  // Touch bookkeeping (which cells were ever written) is excluded, since a
  // cancelled-out cell is indistinguishable from an untouched one.
  bool same_state(const L1Sampler& o) const {
    if (dim_ != o.dim_ || seed_ != o.seed_ || dense_ != o.dense_ ||
        cells_.size() != o.cells_.size() || w_sum_ != o.w_sum_)
      return false;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (cells_[i].count != o.cells_[i].count ||
          cells_[i].idx_sum != o.cells_[i].idx_sum ||
          cells_[i].fp != o.cells_[i].fp)
        return false;
    }
    return true;
  }

  std::size_t words() const {
    return 3 * cells_.size() + (touched_.size() + 7) / 8 +
           (dirty_.size() + 1) / 2 + 8;
  }

 private:
  struct Cell {
    std::int64_t count = 0;
    std::uint64_t idx_sum = 0;
    std::uint64_t fp = 0;
  };

  static unsigned __int128 magnitude(std::int64_t v) {
    return v < 0 ? static_cast<unsigned __int128>(-(v + 1)) + 1
                 : static_cast<unsigned __int128>(v);
  }

  std::size_t flat(std::uint32_t rep, std::uint32_t lvl, std::uint32_t row,
                   std::uint64_t bucket) const {
    return ((static_cast<std::size_t>(rep) * levels_ + lvl) * rows_ + row) *
               buckets_ +
           bucket;
  }

  std::uint32_t level_of(std::uint32_t rep, std::uint64_t i) const {
    if (dense_) return 0;
    std::uint64_t h = prf(seed_, TAG_SAMPLER_LEVEL, rep, i);
    std::uint32_t lvl = 0;
    while ((h & 1) != 0 && lvl + 1 < levels_) {
      ++lvl;
      h >>= 1;
    }
    return lvl;
  }

  std::uint64_t bucket_of(std::uint32_t rep, std::uint32_t lvl,
                          std::uint32_t row, std::uint64_t i) const {
    std::uint64_t key = (static_cast<std::uint64_t>(rep) << 32) |
                        (static_cast<std::uint64_t>(lvl) << 8) | row;
    return prf(seed_, TAG_SAMPLER_BUCKET, key, i) % buckets_;
  }

  std::uint64_t coeff(std::uint64_t i) const {
    return 1 + prf(seed_, TAG_SAMPLER_FP, 0, i) % (M61 - 1);
  }

  void apply(std::size_t off, std::uint64_t i, std::int64_t delta,
             std::uint64_t d61) {
    Cell& c = cells_[off];
    if (__builtin_add_overflow(c.count, delta, &c.count))
      throw runtime_failure("l1 sampler: cell counter overflow");
    c.idx_sum = add61(c.idx_sum, mul61(d61, i % M61));
    c.fp = add61(c.fp, mul61(d61, coeff(i)));
    if (!touched_[off]) {
      touched_[off] = 1;
      dirty_.push_back(static_cast<std::uint32_t>(off));
    }
  }

  // Exact sparse recovery of one (rep, level) bucket array by peeling
  // fingerprint-verified singleton cells. Returns the recovered coordinate
  // list sorted by index, or nullopt when the survivor set is not
  // recoverable (overfull level).
  std::optional<std::vector<std::pair<std::uint64_t, std::int64_t>>> decode(
      std::uint32_t rep, std::uint32_t lvl) const {
    std::unordered_map<std::size_t, Cell> scratch;
    std::size_t lo = flat(rep, lvl, 0, 0);
    std::size_t hi = flat(rep, lvl, rows_ - 1, buckets_ - 1);
    for (std::uint32_t off : dirty_) {
      if (off < lo || off > hi) continue;
      const Cell& c = cells_[off];
      if (c.count != 0 || c.idx_sum != 0 || c.fp != 0) scratch.emplace(off, c);
    }
    std::unordered_map<std::uint64_t, std::int64_t> out;
    bool progress = true;
    while (progress && !scratch.empty()) {
      progress = false;
      for (auto it = scratch.begin(); it != scratch.end();) {
        const Cell& c = it->second;
        if (c.count == 0 && c.idx_sum == 0 && c.fp == 0) {
          it = scratch.erase(it);
          progress = true;
          continue;
        }
        std::uint64_t cm = to61(c.count);
        bool pure = false;
        std::uint64_t idx = 0;
        if (c.count != 0 && cm != 0) {
          idx = mul61(c.idx_sum, inv61(cm));
          pure = idx < dim_ && c.fp == mul61(cm, coeff(idx)) &&
                 level_of(rep, idx) >= lvl;
          if (pure) {
            // The claimed coordinate must actually map to this cell.
            std::uint32_t row =
                static_cast<std::uint32_t>((it->first - lo) / buckets_);
            pure = flat(rep, lvl, row, bucket_of(rep, lvl, row, idx)) ==
                   it->first;
          }
        }
        if (!pure) {
          ++it;
          continue;
        }
        std::int64_t val = c.count;
        out[idx] += val;
        std::uint64_t v61 = to61(val);
        for (std::uint32_t row = 0; row < rows_; ++row) {
          std::size_t off = flat(rep, lvl, row, bucket_of(rep, lvl, row, idx));
          auto cit = scratch.find(off);
          if (cit == scratch.end()) return std::nullopt;  // inconsistent
          cit->second.count -= val;
          cit->second.idx_sum = sub61(cit->second.idx_sum, mul61(v61, idx % M61));
          cit->second.fp = sub61(cit->second.fp, mul61(v61, coeff(idx)));
        }
        progress = true;
        it = scratch.begin();  // restart: peeled mass may purify any cell
      }
    }
    if (!scratch.empty()) return std::nullopt;
    std::vector<std::pair<std::uint64_t, std::int64_t>> list;
    list.reserve(out.size());
    for (const auto& [idx, val] : out)
      if (val != 0) list.emplace_back(idx, val);
    std::sort(list.begin(), list.end());
    return list;
  }

  // Exact inverse-CDF draw over recovered magnitudes (entries sorted by
  // coordinate, so the draw is independent of update order).
  std::uint64_t pick(
      const std::vector<std::pair<std::uint64_t, std::int64_t>>& entries) {
    unsigned __int128 total = 0;
    for (const auto& [idx, val] : entries) total += magnitude(val);
    long double target =
        static_cast<long double>(
            u01(prf(seed_, TAG_SAMPLER_QUERY, query_counter_++, 0))) *
        static_cast<long double>(total);
    unsigned __int128 acc = 0;
    for (const auto& [idx, val] : entries) {
      acc += magnitude(val);
      if (static_cast<long double>(acc) > target) return idx;
    }
    return entries.back().first;
  }

  std::uint64_t dim_;
  double eps_, delta_;
  std::uint64_t seed_;
  bool dense_ = false;
  std::uint32_t levels_ = 1, reps_ = 1, rows_ = 1;
  std::uint64_t buckets_ = 0;
  std::vector<Cell> cells_;
  std::vector<std::uint8_t> touched_;
  std::vector<std::uint32_t> dirty_;
  __int128 w_sum_ = 0;
  std::uint64_t query_counter_ = 0;
};

// A bank of lambda independently seeded samplers over the same vector. The
// bank is applied one sampler at a time from a materialized update list (by
// linearity the sketch state is identical to feeding the raw stream), so
// memory stays one sampler regardless of lambda.
class SamplerBank {
 public:
  SamplerBank(std::uint64_t dim, double eps, double delta, std::uint64_t lambda,
              std::uint64_t base_seed)
      : dim_(dim), eps_(eps), delta_(delta), lambda_(lambda),
        base_seed_(base_seed) {
    if (lambda_ == 0) throw invalid_input("sampler bank: lambda must be positive");
  }

  // lambda = ceil(20 eps^-1 k n^{1+1/k} log2 n).
  static std::uint64_t bank_size(std::uint32_t n, std::uint32_t k, double eps) {
    long double v = 20.0L / eps * k *
                    powl(static_cast<long double>(n), 1.0L + 1.0L / k) *
                    log2l(static_cast<long double>(n));
    return static_cast<std::uint64_t>(ceill(v));
  }

  // Feeds every sampler the same updates and returns the successful draws in
  // sampler order (duplicates preserved; callers wanting a set dedup).
  //
  // In the dense regime the sketch counts are seed-independent, so the bank
  // materializes the magnitude profile once and replays only the per-sampler
  // draw; results are identical to feeding each sampler separately.
  std::vector<std::uint64_t> run(
      std::uint64_t round,
      const std::vector<std::pair<std::uint64_t, std::int64_t>>& updates) const {
    L1Sampler arena(dim_, eps_, delta_, 0);
    std::vector<std::uint64_t> out;
    if (arena.dense()) {
      for (const auto& [idx, dv] : updates) arena.update(idx, dv);
      L1Sampler::DenseProfile profile = arena.dense_profile();
      for (std::uint64_t i = 0; i < lambda_; ++i) {
        if (auto r = profile.draw(prf(base_seed_, TAG_SAMPLER_BANK, round, i)))
          out.push_back(*r);
      }
      return out;
    }
    for (std::uint64_t i = 0; i < lambda_; ++i) {
      arena.reset(prf(base_seed_, TAG_SAMPLER_BANK, round, i));
      for (const auto& [idx, dv] : updates) arena.update(idx, dv);
      if (auto r = arena.query()) out.push_back(*r);
    }
    return out;
  }

  std::uint64_t size() const { return lambda_; }

  std::size_t sampler_words() const {
    return L1Sampler(dim_, eps_, delta_, 0).words();
  }

  // Footprint of the bank if all lambda samplers were held at once; reported
  // in metrics since the chunked execution does not pay it.
  std::size_t virtual_words() const { return lambda_ * sampler_words(); }

 private:
  std::uint64_t dim_;
  double eps_, delta_;
  std::uint64_t lambda_;
  std::uint64_t base_seed_;
};

}  // namespace ssp
