#pragma once
// Shared primitives: error types, machine-word space accounting, counter-based
// randomness, fixed-point conversion, pair indexing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace ssp {

// Malformed input (bad files, bad parameters). The CLI maps this to exit 2.
class invalid_input : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal failure (overflow, broken runtime invariant). The CLI maps this to exit 1.
class runtime_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tracks live O(log n)-bit machine words and the high-water mark.
// Charging conventions: 1 word per stored endpoint pair, 1 per weight,
// 1 per tree parent entry, 1 per tree distance entry, sketch cells 1 word each.
class SpaceLedger {
 public:
  void charge(std::size_t words) {
    live_ += words;
    peak_ = std::max(peak_, live_);
  }
  void release(std::size_t words) {
    if (words > live_)
      throw runtime_failure("SpaceLedger: releasing more words than are live");
    live_ -= words;
  }
  std::size_t live_words() const { return live_; }
  std::size_t peak_words() const { return peak_; }

 private:
  std::size_t live_ = 0;
  std::size_t peak_ = 0;
};

// SplitMix64 finalizer: full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Domain tags keeping independent uses of prf() from colliding.
enum RngTag : std::uint64_t {
  TAG_EDGE_SAMPLE = 1,     // per-round Bernoulli edge sampling
  TAG_SAMPLER_LEVEL = 2,   // sampler geometric level assignment
  TAG_SAMPLER_BUCKET = 3,  // sampler bucket placement
  TAG_SAMPLER_FP = 4,      // sampler fingerprint coefficients
  TAG_SAMPLER_QUERY = 5,   // sampler query-time draws
  TAG_PERM = 6,            // random permutations (layered graphs)
  TAG_GRAPH_GEN = 7,       // random test graph generation
  TAG_SPARSIFIER = 8,      // smoothness sparsifier coin flips
  TAG_PPC = 9,             // pointer-chasing instance draws
  TAG_WEIGHT = 10,         // random edge weights
  TAG_SAMPLER_BANK = 11,   // per-sampler seed derivation inside a bank
  TAG_REDUCE = 12,         // merge-and-reduce per-node seed derivation
};

// Deterministic counter-based generator. Every draw is keyed by
// (seed, tag, counters), so identical runs reproduce identical randomness
// regardless of evaluation order or platform.
inline std::uint64_t prf(std::uint64_t seed, std::uint64_t tag,
                         std::uint64_t c0 = 0, std::uint64_t c1 = 0) {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ mix64(tag));
  h = mix64(h ^ mix64(c0 + 0x3c6ef372fe94f82bULL));
  h = mix64(h ^ mix64(c1 + 0xa54ff53a5f1d36f1ULL));
  return h;
}

// Uniform double in the open interval (0,1). 52 bits keep both endpoints
// exactly representable, so the result never rounds to 0 or 1.
inline double u01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * (1.0 / 4503599627370496.0);
}

using Weight = std::uint64_t;
constexpr Weight INF_WEIGHT = std::numeric_limits<Weight>::max();
constexpr Weight MAX_EDGE_WEIGHT = 1ULL << 40;

// Fixed-point encoding with 20 fractional bits, used when real-valued
// importances feed integer sketch cells.
constexpr int FIXED_POINT_BITS = 20;

inline std::int64_t to_fixed(long double v) {
  long double scaled = v * static_cast<long double>(1LL << FIXED_POINT_BITS);
  if (scaled > 4.6e18L || scaled < -4.6e18L)
    throw runtime_failure("fixed-point overflow");
  return static_cast<std::int64_t>(llroundl(scaled));
}

inline long double from_fixed(std::int64_t v) {
  return static_cast<long double>(v) /
         static_cast<long double>(1LL << FIXED_POINT_BITS);
}

// Rank of the unordered pair {u,v} (u != v, both < n) in the
// C(n,2)-dimensional coordinate space, row-major over the smaller endpoint.
inline std::uint64_t pair_rank(std::uint32_t u, std::uint32_t v, std::uint32_t n) {
  if (u > v) std::swap(u, v);
  if (u == v || v >= n) throw invalid_input("pair_rank: need u != v, both < n");
  std::uint64_t uu = u, nn = n;
  return uu * nn - uu * (uu + 1) / 2 + (v - u - 1);
}

inline std::pair<std::uint32_t, std::uint32_t> pair_unrank(std::uint64_t idx,
                                                           std::uint32_t n) {
  const std::uint64_t nn = n;
  if (n < 2 || idx >= nn * (nn - 1) / 2)
    throw invalid_input("pair_unrank: index out of range");
  // Pairs with smaller endpoint < u occupy the first
  // T(u) = u*n - u*(u+1)/2 ranks; invert via the quadratic formula, then
  // correct the float estimate with exact integer comparisons.
  auto ranks_below = [nn](std::uint64_t x) { return x * nn - x * (x + 1) / 2; };
  long double disc = (static_cast<long double>(n) - 0.5L) *
                         (static_cast<long double>(n) - 0.5L) -
                     2.0L * static_cast<long double>(idx);
  std::uint64_t u =
      disc > 0.0L ? static_cast<std::uint64_t>(
                        std::max(0.0L, static_cast<long double>(n) - 0.5L -
                                           sqrtl(disc)))
                  : nn - 2;
  if (u > nn - 2) u = nn - 2;
  while (u > 0 && ranks_below(u) > idx) --u;
  while (u + 2 < nn && ranks_below(u + 1) <= idx) ++u;
  std::uint64_t v = idx - ranks_below(u) + u + 1;
  return {static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)};
}

// Worker cap: STREAM_SSSP_THREADS when set and sane, hardware concurrency
// otherwise. Aggregation order stays deterministic regardless of the cap.
inline unsigned worker_threads() {
  if (const char* env = std::getenv("STREAM_SSSP_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Contiguous [begin, end) trial ranges, one per worker and never more
// workers than trials.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> trial_chunks(
    std::uint64_t trials) {
  std::uint64_t workers = std::min<std::uint64_t>(
      worker_threads(), std::max<std::uint64_t>(trials, 1));
  std::vector<std::pair<std::uint64_t, std::uint64_t>> chunks;
  chunks.reserve(static_cast<std::size_t>(workers));
  for (std::uint64_t c = 0; c < workers; ++c)
    chunks.emplace_back(trials * c / workers, trials * (c + 1) / workers);
  return chunks;
}

// Runs work(chunk_index, begin, end) for every chunk, concurrently when
// there is more than one. Callers must write per-chunk partials and combine
// them in chunk order afterwards, so results never depend on scheduling.
// The first exception in chunk order is rethrown after all workers join.
template <typename Fn>
inline void run_trial_chunks(
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& chunks,
    Fn&& work) {
  if (chunks.size() == 1) {
    work(std::size_t{0}, chunks[0].first, chunks[0].second);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks.size());
  std::vector<std::thread> pool;
  pool.reserve(chunks.size());
  for (std::size_t c = 0; c < chunks.size(); ++c)
    pool.emplace_back([&work, &errors, c, lo = chunks[c].first,
                       hi = chunks[c].second] {
      try {
        work(c, lo, hi);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace ssp
