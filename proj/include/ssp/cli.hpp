#pragma once
// Command-line front end: instance generation, shortest-path runs with CSV
// metrics, sampler and sparsifier self-tests, and the space-shape benchmark.
// Exit codes: 0 success, 1 runtime failure, 2 invalid input or bad flags.
//
// Requires the vendored single-header CLI11 and json libraries on the
// include path (the build adds ./vendor).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ssp/common.hpp"
#include "ssp/dynamic.hpp"
#include "ssp/gen.hpp"
#include "ssp/graph.hpp"
#include "ssp/hard_instances.hpp"
#include "ssp/l1_sampler.hpp"
#include "ssp/metrics.hpp"
#include "ssp/sparsifier.hpp"
#include "ssp/sssp.hpp"
#include "ssp/stream.hpp"

namespace ssp::cli {

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw runtime_failure("write to '" + path + "' failed");
}

inline void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
}

struct GenFlags {
  std::string hard;  // empty: random graph; "orppc": hard collection instance
  std::string out;
  std::uint64_t seed = 0;
  // random-graph flags
  std::uint32_t n = 64;
  std::uint64_t m = 0;  // 0: density family default
  std::uint64_t max_w = 1;
  std::string mode = "ins";
  double delete_frac = 0.2;
  bool shuffle = false;
  // hard-instance flags
  bool b = false;
  std::uint32_t p = 2;
  double alpha = 1.0;
};

inline void run_gen(const GenFlags& f) {
  if (f.hard == "orppc") {
    LemmaParams params = lemma_params(f.n, f.p, f.alpha);
    if (params.t < 1 || params.w < 2)
      throw invalid_input("gen: parameters degenerate (t < 1 or w < 2)");
    OrPpcSample sample =
        sample_or_ppc(f.b, static_cast<std::uint32_t>(params.t), params.d,
                      static_cast<std::uint32_t>(params.w), f.seed);
    Graph g = collection_graph(sample.instances);
    EdgeStream stream = graph_stream(g);
    write_stream(f.out, stream);
    nlohmann::json side{
        {"b", f.b ? 1 : 0},        {"t", params.t},
        {"d", params.d},           {"w", params.w},
        {"seed", f.seed},          {"rounding", params.rounding},
        {"vertices", g.n()},       {"edges", g.m()},
    };
    if (sample.aligned_index.has_value())
      side["i_star"] = *sample.aligned_index;
    else
      side["i_star"] = nullptr;
    write_text(f.out + ".json", side.dump(2) + "\n");
    return;
  }
  if (!f.hard.empty())
    throw invalid_input("gen: unknown --hard type '" + f.hard + "'");

  std::uint64_t m = f.m == 0 ? density_family_edges(f.n) : f.m;
  Graph g = random_connected_graph(f.n, m, f.max_w, f.seed);
  EdgeStream stream = [&] {
    if (f.mode == "dyn") return deletion_stream(g, f.delete_frac, f.seed);
    if (f.mode != "ins") throw invalid_input("gen: mode must be ins or dyn");
    return f.shuffle ? shuffled_graph_stream(g, f.seed) : graph_stream(g);
  }();
  write_stream(f.out, stream);
}

struct SsspFlags {
  std::string input;
  std::string out;
  std::string run_id = "run";
  std::uint32_t source = 0;
  double eps = 0.25;
  std::uint32_t k = 2;
  std::uint64_t seed = 0;
  bool deterministic = false;
};

inline void run_sssp(const SsspFlags& f) {
  EdgeStream stream = open_stream(f.input);
  Config cfg;
  cfg.n = stream.n();
  cfg.source = f.source;
  cfg.eps = f.eps;
  cfg.k = f.k;
  cfg.seed = f.seed;
  SpaceLedger ledger;
  SsspResult res = f.deterministic
                       ? derandomized_sssp(materialize_final_graph(stream), cfg,
                                           ledger)
                       : approx_sssp(stream, cfg, ledger);
  Graph reference = materialize_final_graph(stream);

  CsvRow row;
  row.run_id = f.run_id;
  row.n = cfg.n;
  row.m = res.metrics.distinct_edges;
  row.k = cfg.k;
  row.eps = cfg.eps;
  row.rounds = res.metrics.rounds;
  row.passes = res.metrics.passes_total;
  row.peak_words = res.metrics.peak_words;
  row.max_ratio = approximation_ratio(reference, cfg.source, res.tree);
  row.rounds_violating_potential =
      potential_violations(res.metrics.q_trace, cfg.eps, cfg.k);
  row.max_fail_count = res.metrics.max_fail_count;
  for (const std::string& w : res.metrics.warnings)
    std::cerr << "warning: " << w << "\n";
  emit(f.out, CsvRow::header() + "\n" + row.to_line() + "\n");
}

struct SamplerTestFlags {
  std::uint64_t dim = 496;
  double eps = 0.1;
  double delta = 0.1;
  std::uint32_t trials = 2000;
  std::uint64_t seed = 0;
  std::string out;
};

// Deterministic test vector: most coordinates hold small nonzero values
// (some split across two updates), every fourth is inserted and then
// cancelled back to zero.
inline std::vector<std::pair<std::uint64_t, std::int64_t>> sampler_test_updates(
    std::uint64_t dim, std::vector<long double>* magnitudes) {
  std::vector<std::pair<std::uint64_t, std::int64_t>> updates;
  magnitudes->assign(dim, 0.0L);
  for (std::uint64_t i = 0; i < dim; ++i) {
    if (i % 4 == 1) {
      updates.emplace_back(i, +7);
      updates.emplace_back(i, -7);
      continue;
    }
    std::int64_t value = static_cast<std::int64_t>(i % 5) + 1;
    if (i % 6 == 0 && value > 1) {
      updates.emplace_back(i, +1);
      updates.emplace_back(i, value - 1);
    } else {
      updates.emplace_back(i, value);
    }
    (*magnitudes)[i] = static_cast<long double>(value);
  }
  return updates;
}

inline void run_sampler_test(const SamplerTestFlags& f) {
  std::vector<long double> magnitudes;
  auto updates = sampler_test_updates(f.dim, &magnitudes);
  long double total = 0.0L;
  std::size_t support = 0;
  for (long double v : magnitudes) {
    total += v;
    if (v > 0.0L) ++support;
  }

  // Trials are independent (one reset per trial, trial-indexed seeds), so
  // they fan out across workers; merging the integer partials in chunk order
  // keeps the report byte-identical for every STREAM_SSSP_THREADS setting.
  struct Partial {
    std::map<std::uint64_t, std::uint64_t> hits;
    std::uint64_t fails = 0;
  };
  const auto chunks = trial_chunks(f.trials);
  std::vector<Partial> parts(chunks.size());
  run_trial_chunks(chunks, [&](std::size_t c, std::uint64_t lo,
                               std::uint64_t hi) {
    L1Sampler sampler(f.dim, f.eps, f.delta, 0);
    Partial& p = parts[c];
    for (std::uint64_t t = lo; t < hi; ++t) {
      sampler.reset(prf(f.seed, TAG_SAMPLER_QUERY, 1000, t));
      for (auto [idx, dv] : updates) sampler.update(idx, dv);
      if (auto got = sampler.query())
        ++p.hits[*got];
      else
        ++p.fails;
    }
  });
  std::map<std::uint64_t, std::uint64_t> hits;
  std::uint64_t fails = 0;
  for (const Partial& p : parts) {
    fails += p.fails;
    for (auto [idx, count] : p.hits) hits[idx] += count;
  }
  const std::uint64_t successes = f.trials - fails;

  long double tv = 0.0L;
  for (std::uint64_t i = 0; i < f.dim; ++i) {
    long double exact = magnitudes[i] / total;
    long double emp = successes == 0
                          ? 0.0L
                          : static_cast<long double>(
                                hits.count(i) ? hits.at(i) : 0) /
                                successes;
    tv += fabsl(exact - emp);
  }
  tv /= 2.0L;

  const double tv_bound =
      f.eps + 2.0 * std::sqrt(static_cast<double>(support) /
                              std::max<std::uint64_t>(successes, 1));
  const double fail_rate =
      static_cast<double>(fails) / static_cast<double>(f.trials);
  const double fail_bound =
      f.delta + 4.0 * std::sqrt(f.delta * (1.0 - f.delta) /
                                static_cast<double>(f.trials)) +
      4.0 / static_cast<double>(f.trials);

  // Linearity: inserting and deleting the same value is a no-op on the
  // sketch state, bit for bit.
  L1Sampler a(f.dim, f.eps, f.delta, 0), b(f.dim, f.eps, f.delta, 0);
  a.reset(prf(f.seed, TAG_SAMPLER_QUERY, 1001, 0));
  b.reset(prf(f.seed, TAG_SAMPLER_QUERY, 1001, 0));
  for (auto [idx, dv] : updates) {
    a.update(idx, dv);
    b.update(idx, dv);
  }
  b.update(0, +3);
  b.update(0, -3);
  const bool linear = a.same_state(b);

  const bool pass =
      static_cast<double>(tv) <= tv_bound && fail_rate <= fail_bound && linear;
  nlohmann::json report{
      {"dim", f.dim},           {"eps", f.eps},
      {"delta", f.delta},       {"trials", f.trials},
      {"successes", successes}, {"fail_rate", fail_rate},
      {"fail_bound", fail_bound}, {"tv", static_cast<double>(tv)},
      {"tv_bound", tv_bound},   {"linearity_ok", linear},
      {"pass", pass},
  };
  emit(f.out, report.dump(2) + "\n");
  if (!pass) throw runtime_failure("sampler-test: bounds exceeded");
}

struct SparsifierTestFlags {
  std::uint32_t n = 8;
  std::uint32_t edges = 10;
  double eps = 0.5;
  std::uint32_t seeds = 1000;
  std::uint64_t seed = 0;
  std::uint32_t source = 0;
  std::string out;
};

inline void run_sparsifier_test(const SparsifierTestFlags& f) {
  Graph g = random_connected_graph(f.n, f.edges, 4,
                                   prf(f.seed, TAG_GRAPH_GEN, 3, 0));
  // Spread importances over several orders of magnitude so some sampling
  // probabilities land strictly below one.
  std::vector<long double> q;
  for (std::size_t i = 0; i < g.m(); ++i)
    q.push_back(powl(2.0L, static_cast<long double>(
                               prf(f.seed, TAG_SPARSIFIER, i, 9) % 16)));
  WeightedImportanceGraph parent(g, std::move(q));
  SparsifierVerifier verifier(parent, f.source);

  // Seeds are independent and the verifier is read-only after construction,
  // so trials fan out across workers; counts merge in chunk order.
  const auto chunks = trial_chunks(f.seeds);
  std::vector<std::uint32_t> passed_per_chunk(chunks.size(), 0);
  run_trial_chunks(chunks,
                   [&](std::size_t c, std::uint64_t lo, std::uint64_t hi) {
                     for (std::uint64_t s = lo; s < hi; ++s) {
                       SmoothnessSparsifier cand = sample_sparsifier(
                           parent, f.eps, prf(f.seed, TAG_SPARSIFIER, s, 7));
                       if (verifier.check(cand)) ++passed_per_chunk[c];
                     }
                   });
  std::uint32_t passed = 0;
  for (std::uint32_t chunk_passed : passed_per_chunk) passed += chunk_passed;
  const double rate = static_cast<double>(passed) / f.seeds;
  nlohmann::json report{
      {"n", f.n},     {"edges", g.m()},   {"eps", f.eps},
      {"seeds", f.seeds}, {"passed", passed}, {"pass_rate", rate},
      {"pass", rate >= 0.99},
  };
  emit(f.out, report.dump(2) + "\n");
  if (rate < 0.99) throw runtime_failure("sparsifier-test: pass rate below 0.99");
}

struct BenchFlags {
  std::string family = "density";
  std::uint32_t k = 2;
  double eps = 0.5;
  std::vector<std::uint32_t> sizes{64, 256, 1024};
  std::uint64_t seed = 0;
  std::string out;
};

inline void run_bench(const BenchFlags& f) {
  if (f.family != "density")
    throw invalid_input("bench: unknown family '" + f.family + "'");
  std::string text = CsvRow::header() + "\n";
  for (std::uint32_t n : f.sizes) {
    Graph g = random_connected_graph(n, density_family_edges(n), 1,
                                     prf(f.seed, TAG_GRAPH_GEN, 4, n));
    EdgeStream stream = graph_stream(g);
    Config cfg;
    cfg.n = n;
    cfg.source = 0;
    cfg.eps = f.eps;
    cfg.k = f.k;
    cfg.seed = prf(f.seed, TAG_GRAPH_GEN, 5, n);
    SpaceLedger ledger;
    SsspResult res = approx_sssp_insertion(stream, cfg, ledger);

    CsvRow row;
    row.run_id = "density-" + std::to_string(n);
    row.n = n;
    row.m = res.metrics.distinct_edges;
    row.k = cfg.k;
    row.eps = cfg.eps;
    row.rounds = res.metrics.rounds;
    row.passes = res.metrics.passes_total;
    row.peak_words = res.metrics.peak_words;
    row.max_ratio = approximation_ratio(g, cfg.source, res.tree);
    row.rounds_violating_potential =
        potential_violations(res.metrics.q_trace, cfg.eps, cfg.k);
    row.max_fail_count = res.metrics.max_fail_count;
    text += row.to_line() + "\n";
  }
  emit(f.out, text);
}

}  // namespace detail

// Entry point shared by the binary and the tests.
inline int run(int argc, const char* const* argv) {
  CLI::App app{"semi-streaming approximate shortest-path toolkit"};
  app.require_subcommand(1);

  detail::GenFlags gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate instance streams");
  gen_cmd->add_option("--hard", gen.hard, "hard-instance family (orppc)");
  gen_cmd->add_option("--out", gen.out, "output stream path")->required();
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--n", gen.n, "vertex count");
  gen_cmd->add_option("--m", gen.m, "edge count (0: density family)");
  gen_cmd->add_option("--max-w", gen.max_w, "max edge weight");
  gen_cmd->add_option("--mode", gen.mode, "stream mode: ins or dyn");
  gen_cmd->add_option("--delete-frac", gen.delete_frac,
                      "fraction deleted in dyn mode");
  gen_cmd->add_flag("--shuffle", gen.shuffle, "shuffle insertion order");
  gen_cmd->add_option("--b", gen.b, "hard-instance bit");
  gen_cmd->add_option("--p", gen.p, "pass parameter");
  gen_cmd->add_option("--alpha", gen.alpha, "approximation slack");
  gen_cmd->callback([&] { detail::run_gen(gen); });

  detail::SsspFlags sssp;
  CLI::App* sssp_cmd =
      app.add_subcommand("sssp", "approximate shortest paths over a stream");
  sssp_cmd->add_option("--input", sssp.input, "stream file")->required();
  sssp_cmd->add_option("--out", sssp.out, "CSV output path (default stdout)");
  sssp_cmd->add_option("--run-id", sssp.run_id, "row label");
  sssp_cmd->add_option("--source", sssp.source, "source vertex");
  sssp_cmd->add_option("--eps", sssp.eps, "approximation parameter");
  sssp_cmd->add_option("--k", sssp.k, "spanner/rounds parameter");
  sssp_cmd->add_option("--seed", sssp.seed, "run seed");
  sssp_cmd->add_flag("--deterministic", sssp.deterministic,
                     "derandomized micro pipeline (at most 12 edges)");
  sssp_cmd->callback([&] { detail::run_sssp(sssp); });

  detail::SamplerTestFlags sampler;
  CLI::App* sampler_cmd =
      app.add_subcommand("sampler-test", "l1 sampler distribution self-test");
  sampler_cmd->add_option("--dim", sampler.dim, "vector dimension");
  sampler_cmd->add_option("--eps", sampler.eps, "distribution slack");
  sampler_cmd->add_option("--delta", sampler.delta, "failure probability");
  sampler_cmd->add_option("--trials", sampler.trials, "trial count");
  sampler_cmd->add_option("--seed", sampler.seed, "trial seed");
  sampler_cmd->add_option("--out", sampler.out, "JSON output path");
  sampler_cmd->callback([&] { detail::run_sampler_test(sampler); });

  detail::SparsifierTestFlags sparsifier;
  CLI::App* sparsifier_cmd = app.add_subcommand(
      "sparsifier-test", "smoothness sparsifier Monte Carlo self-test");
  sparsifier_cmd->add_option("--n", sparsifier.n, "vertex count");
  sparsifier_cmd->add_option("--edges", sparsifier.edges, "edge count (<= 12)");
  sparsifier_cmd->add_option("--eps", sparsifier.eps, "sparsifier eps");
  sparsifier_cmd->add_option("--seeds", sparsifier.seeds, "trial count");
  sparsifier_cmd->add_option("--seed", sparsifier.seed, "base seed");
  sparsifier_cmd->add_option("--source", sparsifier.source, "verification source");
  sparsifier_cmd->add_option("--out", sparsifier.out, "JSON output path");
  sparsifier_cmd->callback([&] { detail::run_sparsifier_test(sparsifier); });

  detail::BenchFlags bench;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "space-shape benchmark family");
  bench_cmd->add_option("--family", bench.family, "benchmark family");
  bench_cmd->add_option("--k", bench.k, "spanner/rounds parameter");
  bench_cmd->add_option("--eps", bench.eps, "approximation parameter");
  bench_cmd->add_option("--sizes", bench.sizes, "vertex counts");
  bench_cmd->add_option("--seed", bench.seed, "base seed");
  bench_cmd->add_option("--out", bench.out, "CSV output path");
  bench_cmd->callback([&] { detail::run_bench(bench); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  } catch (const invalid_input& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const runtime_failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ssp::cli
