#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "ncc/engine.hpp"

namespace ncc {

struct WeightedEdge {
  NodeId u = 0;
  NodeId v = 0;
  std::uint64_t w = 0;

  bool operator==(const WeightedEdge&) const = default;
};

/// Effective key (w, min id, max id); distinct for distinct edges.
struct EdgeKey {
  std::uint64_t w = 0;
  NodeId lo = 0;
  NodeId hi = 0;

  auto operator<=>(const EdgeKey&) const = default;
};

constexpr EdgeKey tie_break(std::uint64_t w, NodeId u, NodeId v) noexcept {
  return u < v ? EdgeKey{w, u, v} : EdgeKey{w, v, u};
}
constexpr EdgeKey key_of(const WeightedEdge& e) noexcept { return tie_break(e.w, e.u, e.v); }

inline constexpr EdgeKey kInfiniteKey{std::numeric_limits<std::uint64_t>::max(),
                                      std::numeric_limits<NodeId>::max(), std::numeric_limits<NodeId>::max()};
inline constexpr EdgeKey kNoKey{0, 0, 0};

/// Normalizes to u < v.
constexpr WeightedEdge normalized(WeightedEdge e) noexcept {
  if (e.u > e.v) std::swap(e.u, e.v);
  return e;
}

struct Incident {
  NodeId to = 0;
  std::uint64_t w = 0;
};

/// Local view of a vertex-partitioned graph: adj[v] holds v's incident edges.
using Adjacency = std::vector<std::vector<Incident>>;

struct Graph {
  std::uint32_t n = 0;
  std::vector<WeightedEdge> edges;  // u < v

  Adjacency adjacency() const;
  std::uint32_t max_degree() const;
  /// Throws InvalidParams on self-loops, duplicates or ids outside [1, n].
  void validate() const;
  bool operator==(const Graph&) const = default;
};

struct GenParams {
  std::string kind = "gnm";  // gnm, gnp, path, cycle, star, complete, grid
  std::uint32_t n = 0;
  std::uint64_t m = 0;       // gnm
  double p = 0;              // gnp
  std::uint32_t rows = 0;    // grid; n = rows * cols
  std::uint32_t cols = 0;
  std::uint64_t seed = 1;
  std::uint64_t max_weight = std::uint64_t{1} << 30;  // weights uniform in [1, max_weight]
};

Graph gen_graph(const GenParams& params);

void write_graph(std::ostream& out, const Graph& g);
Graph read_graph(std::istream& in);
Graph read_graph_file(const std::string& path);
void write_graph_file(const std::string& path, const Graph& g);

struct MsfOracle {
  std::uint64_t weight = 0;
  std::vector<WeightedEdge> edges;  // sorted by key
};

MsfOracle kruskal_oracle(const Graph& g);
MsfOracle prim_oracle(const Graph& g);
/// Smallest id of the component of every node (index = id).
std::vector<NodeId> components_oracle(const Graph& g);

/// Sorts by key and normalizes endpoints.
std::vector<WeightedEdge> canonical_edges(std::vector<WeightedEdge> edges);

}  // namespace ncc
