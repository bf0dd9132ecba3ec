#pragma once
// One-row-per-run CSV emission for benchmark tables.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>

namespace ssp {

struct CsvRow {
  std::string run_id;
  std::uint32_t n = 0;
  std::uint64_t m = 0;
  std::uint32_t k = 0;
  double eps = 0.0;
  std::uint32_t rounds = 0;
  std::uint64_t passes = 0;
  std::uint64_t peak_words = 0;
  double max_ratio = 0.0;
  std::uint32_t rounds_violating_potential = 0;
  std::uint64_t max_fail_count = 0;

  static std::string header() {
    return "run_id,n,m,k,eps,R,passes,peak_words,max_ratio,"
           "rounds_violating_potential,max_fail_count";
  }

  std::string to_line() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%s,%u,%" PRIu64 ",%u,%g,%u,%" PRIu64 ",%" PRIu64
                  ",%.6f,%u,%" PRIu64,
                  run_id.c_str(), n, m, k, eps, rounds, passes, peak_words,
                  max_ratio, rounds_violating_potential, max_fail_count);
    return std::string(buf);
  }
};

}  // namespace ssp
