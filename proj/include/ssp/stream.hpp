#pragma once
// Edge streams: file format, pass metering, and reference materialization.
//
// File format:
//   # comment lines start with '#'
//   n=<vertices> mode=<ins|dyn>
//   <u> <v> <w>          (insertion)
//   <u> <v> <w> <+|->    (dynamic; '+' also accepted in insertion mode)

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssp/common.hpp"
#include "ssp/graph.hpp"

namespace ssp {

enum class StreamMode { insertion, dynamic };

struct EdgeUpdate {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  Weight w = 0;
  std::int8_t sign = +1;  // +1 insert, -1 delete

  friend bool operator==(const EdgeUpdate&, const EdgeUpdate&) = default;
};

// A fixed sequence of edge updates with pass accounting. Passes replay the
// exact same order every time; only one pass may be active at once.
class EdgeStream {
 public:
  static EdgeStream from_updates(std::uint32_t n, StreamMode mode,
                                 std::vector<EdgeUpdate> updates) {
    EdgeStream s;
    s.n_ = n;
    s.mode_ = mode;
    s.updates_ = std::move(updates);
    for (const EdgeUpdate& e : s.updates_) s.validate_update(e);
    return s;
  }

  std::uint32_t n() const { return n_; }
  StreamMode mode() const { return mode_; }
  std::size_t size() const { return updates_.size(); }
  std::uint64_t passes_consumed() const { return passes_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // One metered pass over the stream. Iteration order is the stored order.
  class Pass {
   public:
    Pass(Pass&& o) noexcept : stream_(o.stream_) { o.stream_ = nullptr; }
    Pass& operator=(Pass&&) = delete;
    Pass(const Pass&) = delete;
    ~Pass() {
      if (stream_ != nullptr) stream_->pass_active_ = false;
    }
    const EdgeUpdate* begin() const { return stream_->updates_.data(); }
    const EdgeUpdate* end() const {
      return stream_->updates_.data() + stream_->updates_.size();
    }

   private:
    friend class EdgeStream;
    explicit Pass(EdgeStream* s) : stream_(s) {}
    EdgeStream* stream_;
  };

  Pass begin_pass() {
    if (pass_active_)
      throw runtime_failure("begin_pass: a pass is already active");
    pass_active_ = true;
    ++passes_;
    return Pass(this);
  }

  // Unmetered access for reference-only consumers (oracles, generators).
  const std::vector<EdgeUpdate>& raw_updates() const { return updates_; }

  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  void validate_update(const EdgeUpdate& e) const {
    if (e.u == e.v) throw invalid_input("stream: self-loop update");
    if (e.u >= n_ || e.v >= n_)
      throw invalid_input("stream: endpoint out of range");
    if (e.w > MAX_EDGE_WEIGHT) throw invalid_input("stream: weight above 2^40");
    if (e.sign != +1 && e.sign != -1)
      throw invalid_input("stream: sign must be +1 or -1");
    if (mode_ == StreamMode::insertion && e.sign != +1)
      throw invalid_input("stream: deletion in insertion-only stream");
  }

  std::uint32_t n_ = 0;
  StreamMode mode_ = StreamMode::insertion;
  std::vector<EdgeUpdate> updates_;
  std::uint64_t passes_ = 0;
  bool pass_active_ = false;
  std::vector<std::string> warnings_;
};

namespace detail {

inline std::uint64_t parse_u64(const std::string& tok, std::size_t line_no,
                               const char* what) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw invalid_input("stream parse error at line " + std::to_string(line_no) +
                        ": bad " + what + " '" + tok + "'");
  return value;
}

}  // namespace detail

// Parses a stream file. Malformed headers or lines raise invalid_input with
// the offending line number.
inline EdgeStream open_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("open_stream: cannot open '" + path + "'");

  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::uint32_t n = 0;
  StreamMode mode = StreamMode::insertion;
  std::vector<EdgeUpdate> updates;

  while (std::getline(in, line)) {
    ++line_no;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;

    std::istringstream ls(line);
    if (!have_header) {
      std::string ntok, mtok;
      ls >> ntok >> mtok;
      if (ntok.rfind("n=", 0) != 0 || mtok.rfind("mode=", 0) != 0)
        throw invalid_input("stream parse error at line " +
                            std::to_string(line_no) +
                            ": expected header 'n=<int> mode=<ins|dyn>'");
      std::uint64_t nv = detail::parse_u64(ntok.substr(2), line_no, "vertex count");
      if (nv < 2 || nv > 0xffffffffULL)
        throw invalid_input("stream parse error at line " +
                            std::to_string(line_no) + ": vertex count out of range");
      n = static_cast<std::uint32_t>(nv);
      std::string mv = mtok.substr(5);
      if (mv == "ins")
        mode = StreamMode::insertion;
      else if (mv == "dyn")
        mode = StreamMode::dynamic;
      else
        throw invalid_input("stream parse error at line " +
                            std::to_string(line_no) + ": mode must be ins or dyn");
      have_header = true;
      continue;
    }

    std::string ut, vt, wt, st;
    ls >> ut >> vt >> wt >> st;
    if (wt.empty())
      throw invalid_input("stream parse error at line " +
                          std::to_string(line_no) + ": expected '<u> <v> <w> [sign]'");
    EdgeUpdate e;
    std::uint64_t u = detail::parse_u64(ut, line_no, "endpoint");
    std::uint64_t v = detail::parse_u64(vt, line_no, "endpoint");
    if (u >= n || v >= n)
      throw invalid_input("stream parse error at line " + std::to_string(line_no) +
                          ": endpoint out of range");
    if (u == v)
      throw invalid_input("stream parse error at line " + std::to_string(line_no) +
                          ": self-loop");
    e.u = static_cast<std::uint32_t>(u);
    e.v = static_cast<std::uint32_t>(v);
    e.w = detail::parse_u64(wt, line_no, "weight");
    if (e.w > MAX_EDGE_WEIGHT)
      throw invalid_input("stream parse error at line " + std::to_string(line_no) +
                          ": weight above 2^40");
    if (st.empty()) {
      if (mode == StreamMode::dynamic)
        throw invalid_input("stream parse error at line " +
                            std::to_string(line_no) +
                            ": dynamic updates need a +/- sign");
      e.sign = +1;
    } else if (st == "+") {
      e.sign = +1;
    } else if (st == "-") {
      if (mode == StreamMode::insertion)
        throw invalid_input("stream parse error at line " +
                            std::to_string(line_no) +
                            ": deletion in insertion-only stream");
      e.sign = -1;
    } else {
      throw invalid_input("stream parse error at line " + std::to_string(line_no) +
                          ": bad sign '" + st + "'");
    }
    updates.push_back(e);
  }
  if (!have_header) throw invalid_input("open_stream: missing header line");
  return EdgeStream::from_updates(n, mode, std::move(updates));
}

inline void write_stream(const std::string& path, const EdgeStream& s) {
  std::ofstream out(path);
  if (!out) throw invalid_input("write_stream: cannot open '" + path + "'");
  out << "n=" << s.n() << " mode="
      << (s.mode() == StreamMode::insertion ? "ins" : "dyn") << "\n";
  for (const EdgeUpdate& e : s.raw_updates()) {
    out << e.u << " " << e.v << " " << e.w;
    if (s.mode() == StreamMode::dynamic) out << " " << (e.sign > 0 ? "+" : "-");
    out << "\n";
  }
  if (!out) throw runtime_failure("write_stream: write failed");
}

// Reference-only materialization of the final graph (not pass-metered, not
// space-charged): used by oracles and by dynamic-mode spanner construction.
//
// Dynamic mode enforces net counts in {0,1} per pair: deleting an absent edge
// or inserting a present one is an error, deletions must match the inserted
// weight. Insertion mode keeps the first copy of a duplicate pair and records
// a warning.
inline Graph materialize_final_graph(EdgeStream& s) {
  std::unordered_map<std::uint64_t, Weight> present;
  present.reserve(s.size());
  std::size_t dup_warnings = 0;
  for (const EdgeUpdate& e : s.raw_updates()) {
    std::uint64_t key = pair_rank(e.u, e.v, s.n());
    auto it = present.find(key);
    if (e.sign > 0) {
      if (it != present.end()) {
        if (s.mode() == StreamMode::dynamic)
          throw invalid_input("materialize: duplicate insert drives net count above 1");
        ++dup_warnings;  // insertion mode: keep first occurrence
        continue;
      }
      present.emplace(key, e.w);
    } else {
      if (it == present.end())
        throw invalid_input("materialize: deletion of an absent edge");
      if (it->second != e.w)
        throw invalid_input("materialize: deletion weight does not match insert");
      present.erase(it);
    }
  }
  if (dup_warnings > 0)
    s.add_warning("materialize: ignored " + std::to_string(dup_warnings) +
                  " duplicate insertion(s), first occurrence kept");
  std::vector<Edge> edges;
  edges.reserve(present.size());
  for (const auto& [key, w] : present) {
    auto [u, v] = pair_unrank(key, s.n());
    edges.push_back(Edge{u, v, w});
  }
  return Graph(s.n(), std::move(edges));
}

}  // namespace ssp
