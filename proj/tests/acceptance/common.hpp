#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ncc/engine.hpp"
#include "ncc/graph.hpp"

namespace acc {

/// FNV-1a over everything a criterion computes, for the replay check.
class Digest {
 public:
  void add(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (x >> (8 * i)) & 0xff;
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(const ncc::RoundReport& r) {
    add(r.rounds);
    add(r.total_messages);
    add(r.total_bits);
    add(r.max_sent_per_node_round);
    add(r.max_recv_per_node_round);
    add(r.violations);
    add(r.recv_overflows);
  }
  void add(const std::vector<ncc::WeightedEdge>& edges) {
    add(edges.size());
    for (const auto& e : edges) {
      add(e.u);
      add(e.v);
      add(e.w);
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

struct Outcome {
  bool pass = false;
  std::string detail;
  std::uint64_t digest = 0;
  // Budget violations and depth-bound failures seen, for the cross-criterion checks.
  std::uint64_t violations = 0;
  std::uint64_t depth_failures = 0;
  double seconds = 0;
};

inline ncc::SimConfig config(std::uint32_t n, std::uint64_t seed) {
  ncc::SimConfig c;
  c.n = n;
  c.seed = seed;
  return c;
}

inline double log2d(double x) { return std::log2(x); }

/// ceil(log2 D / log2 log2 n), the sampling depth term of the MSF bound.
inline std::uint32_t depth_term(std::uint32_t n, std::uint32_t delta) {
  return static_cast<std::uint32_t>(std::ceil(log2d(delta) / log2d(log2d(n))));
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, ...);

Outcome msf_exactness();
Outcome sf_correctness();
Outcome sf_scaling();
Outcome msf_scaling();
Outcome kkt_statistics();
Outcome sketch_suite();
Outcome agm_cuts();
Outcome primitive_equivalence();

}  // namespace acc
