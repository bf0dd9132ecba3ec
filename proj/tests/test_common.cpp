#include "ssp/common.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <set>

namespace {

using namespace ssp;

TEST(Mix64, MatchesPublishedVectors) {
  // SplitMix64 finalizer of 0 and 1 (widely published reference outputs).
  EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(mix64(1), 0x910a2dec89025cc1ULL);
}

TEST(Prf, FrozenValueAndDeterminism) {
  EXPECT_EQ(prf(1, 2, 3, 4), 0xca963501b847b343ULL);
  EXPECT_EQ(prf(0, TAG_EDGE_SAMPLE), 0xb0c20c35d89ee3b7ULL);
  EXPECT_EQ(prf(7, TAG_WEIGHT, 5, 6), prf(7, TAG_WEIGHT, 5, 6));
}

TEST(Prf, TagAndCounterSeparation) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t tag = 1; tag <= 12; ++tag)
    seen.insert(prf(42, tag, 0, 0));
  EXPECT_EQ(seen.size(), 12u) << "tags must not collide";
  EXPECT_NE(prf(1, 1, 0, 0), prf(1, 1, 1, 0));
  EXPECT_NE(prf(1, 1, 0, 0), prf(1, 1, 0, 1));
  EXPECT_NE(prf(1, 1, 0, 0), prf(2, 1, 0, 0));
}

TEST(U01, OpenIntervalAndMean) {
  EXPECT_GT(u01(0), 0.0);
  EXPECT_LT(u01(~std::uint64_t{0}), 1.0);
  double sum = 0.0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) sum += u01(prf(3, TAG_GRAPH_GEN, i, 0));
  // Mean of 10^5 uniforms: sigma = 1/sqrt(12*trials) ~ 0.0009; allow 5 sigma.
  EXPECT_NEAR(sum / trials, 0.5, 0.005);
}

TEST(PairRank, FrozenSmallValues) {
  EXPECT_EQ(pair_rank(0, 1, 4), 0u);
  EXPECT_EQ(pair_rank(0, 3, 4), 2u);
  EXPECT_EQ(pair_rank(1, 2, 4), 3u);
  EXPECT_EQ(pair_rank(2, 3, 4), 5u);
  EXPECT_EQ(pair_rank(3, 2, 4), 5u) << "order of endpoints must not matter";
}

TEST(PairRank, RejectsBadPairs) {
  EXPECT_THROW(pair_rank(2, 2, 4), invalid_input);
  EXPECT_THROW(pair_rank(0, 4, 4), invalid_input);
}

TEST(PairUnrank, RoundTripExhaustiveSmall) {
  for (std::uint32_t n = 2; n <= 60; ++n) {
    std::uint64_t count = std::uint64_t{n} * (n - 1) / 2;
    for (std::uint64_t idx = 0; idx < count; ++idx) {
      auto [u, v] = pair_unrank(idx, n);
      ASSERT_LT(u, v);
      ASSERT_LT(v, n);
      ASSERT_EQ(pair_rank(u, v, n), idx);
    }
  }
}

TEST(PairUnrank, LargeNBoundaries) {
  const std::uint32_t n = 200000;
  const std::uint64_t count = std::uint64_t{n} * (n - 1) / 2;
  EXPECT_EQ(pair_unrank(0, n), (std::pair<std::uint32_t, std::uint32_t>{0, 1}));
  EXPECT_EQ(pair_unrank(count - 1, n),
            (std::pair<std::uint32_t, std::uint32_t>{n - 2, n - 1}));
  for (std::uint64_t idx : {std::uint64_t{12345}, count / 3, count / 2,
                            count - 12345}) {
    auto [u, v] = pair_unrank(idx, n);
    EXPECT_EQ(pair_rank(u, v, n), idx);
  }
  EXPECT_THROW(pair_unrank(count, n), invalid_input);
  EXPECT_THROW(pair_unrank(0, 1), invalid_input);
}

TEST(SpaceLedger, TracksLiveAndPeak) {
  SpaceLedger ledger;
  EXPECT_EQ(ledger.live_words(), 0u);
  EXPECT_EQ(ledger.peak_words(), 0u);
  ledger.charge(10);
  ledger.charge(5);
  EXPECT_EQ(ledger.live_words(), 15u);
  ledger.release(12);
  EXPECT_EQ(ledger.live_words(), 3u);
  EXPECT_EQ(ledger.peak_words(), 15u) << "peak must persist after release";
  ledger.charge(4);
  EXPECT_EQ(ledger.peak_words(), 15u);
  EXPECT_THROW(ledger.release(100), runtime_failure);
}

TEST(FixedPoint, FrozenEncodingsAndRoundTrip) {
  EXPECT_EQ(to_fixed(1.0L), 1048576);
  EXPECT_EQ(to_fixed(0.5L), 524288);
  EXPECT_EQ(to_fixed(-2.25L), -2359296);
  for (long double v : {0.0L, 3.75L, -123.0625L, 1e9L}) {
    EXPECT_NEAR(static_cast<double>(from_fixed(to_fixed(v))),
                static_cast<double>(v), 1e-6);
  }
  EXPECT_THROW(to_fixed(1e20L), runtime_failure);
  EXPECT_THROW(to_fixed(-1e20L), runtime_failure);
}

TEST(Errors, ExceptionHierarchy) {
  EXPECT_THROW(throw invalid_input("x"), std::runtime_error);
  EXPECT_THROW(throw runtime_failure("x"), std::runtime_error);
}

TEST(WorkerThreads, RespectsEnvironmentCap) {
  // Thread count must be at least one regardless of environment.
  EXPECT_GE(worker_threads(), 1u);
  setenv("STREAM_SSSP_THREADS", "3", 1);
  EXPECT_EQ(worker_threads(), 3u);
  setenv("STREAM_SSSP_THREADS", "0", 1);
  EXPECT_GE(worker_threads(), 1u) << "zero must fall back to a sane default";
  unsetenv("STREAM_SSSP_THREADS");
}

TEST(WorkerThreads, ChunksPartitionTheTrialRange) {
  setenv("STREAM_SSSP_THREADS", "4", 1);
  for (std::uint64_t trials : {0ull, 1ull, 3ull, 4ull, 10ull, 101ull}) {
    auto chunks = trial_chunks(trials);
    ASSERT_FALSE(chunks.empty());
    EXPECT_LE(chunks.size(), 4u);
    if (trials > 0) EXPECT_LE(chunks.size(), trials);
    std::uint64_t cursor = 0;
    for (auto [lo, hi] : chunks) {
      EXPECT_EQ(lo, cursor);
      EXPECT_LE(lo, hi);
      cursor = hi;
    }
    EXPECT_EQ(cursor, trials);
  }
  unsetenv("STREAM_SSSP_THREADS");
}

TEST(WorkerThreads, ChunkRunnerCoversEveryIndexAndRethrows) {
  setenv("STREAM_SSSP_THREADS", "4", 1);
  auto chunks = trial_chunks(37);
  std::vector<std::uint64_t> seen_per_chunk(chunks.size(), 0);
  run_trial_chunks(chunks,
                   [&](std::size_t c, std::uint64_t lo, std::uint64_t hi) {
                     for (std::uint64_t t = lo; t < hi; ++t)
                       seen_per_chunk[c] += t + 1;
                   });
  std::uint64_t total = 0;
  for (std::uint64_t s : seen_per_chunk) total += s;
  EXPECT_EQ(total, 37u * 38u / 2u);  // every index visited exactly once

  EXPECT_THROW(
      run_trial_chunks(chunks,
                       [&](std::size_t, std::uint64_t, std::uint64_t) {
                         throw runtime_failure("worker failure");
                       }),
      runtime_failure);
  unsetenv("STREAM_SSSP_THREADS");
}

constexpr Weight kWeightCap = MAX_EDGE_WEIGHT;
static_assert(kWeightCap == (std::uint64_t{1} << 40));
static_assert(INF_WEIGHT == ~std::uint64_t{0});

}  // namespace
