#pragma once

#include <cstdint>
#include <vector>

#include "ncc/engine.hpp"
#include "ncc/graph.hpp"
#include "ncc/sketch.hpp"

namespace ncc {

/// Bits of one edge on the wire: two ids and a 64-bit weight.
std::uint64_t edge_bits(std::uint32_t n);

/// For each query target, the label held by that vertex. queries[h] is the
/// list of node h (index = id); the answer has the same shape. Targets are
/// sorted, interior runs ask their vertex directly and runs cut by a node
/// boundary learn the label by multicast.
std::vector<std::vector<NodeId>> resolve_labels(Engine& eng, const std::vector<std::vector<NodeId>>& queries,
                                                const std::vector<NodeId>& label);

/// Global OR of one flag per node, known to every node afterwards.
bool any_node(Engine& eng, const std::vector<char>& flags);

// ---------------------------------------------------------------- spanning forest

struct SfOptions {
  std::uint64_t seed = 1;
  std::uint32_t max_phases = 0;  // 0: 16 ceil(log2 n) + 16
  bool materialize_nodes = false;
};

struct SfResult {
  std::vector<std::vector<WeightedEdge>> known;  // index = node id; forest edges each node knows
  std::vector<WeightedEdge> forest;              // union, sorted by key
  std::vector<NodeId> label;                     // leader per node (index = id)
  std::uint32_t phases = 0;
  std::uint32_t sampler_failures = 0;
  std::uint64_t rounds = 0;
};

SfResult spanning_forest(Engine& eng, const Graph& g, const SfOptions& opt = {});

// ---------------------------------------------------------------- Boruvka

struct BoruvkaPhase {
  std::vector<NodeId> leader;  // per node, leader of its component at the phase start
  std::vector<EdgeKey> mwoe;   // per node, MWOE key of its component; kNoKey if it did not merge
  std::vector<WeightedEdge> mwoe_edge;  // per node, the MWOE itself when present
};

struct BoruvkaResult {
  std::vector<std::vector<WeightedEdge>> known;  // index = node id; MSF edges each node knows
  std::vector<WeightedEdge> forest;              // union, sorted by key
  std::vector<BoruvkaPhase> phases;              // merging phases only
  std::vector<NodeId> final_leader;              // components after the last phase
  std::uint64_t rounds = 0;
};

struct BoruvkaOptions {
  std::uint64_t seed = 1;
  std::uint32_t c_even = 33;  // UnevenDistribution above c_even ceil(log2 n) edges at a node
};

/// MSF of the edges held across nodes (held[v], index = id), each at most
/// c_even ceil(log2 n). Every edge must be held exactly once.
BoruvkaResult boruvka_msf_even(Engine& eng, const std::vector<std::vector<WeightedEdge>>& held,
                               const BoruvkaOptions& opt = {});

/// Replays the recorded merges; empty when every phase matches its successor.
std::string audit_decomposition(const BoruvkaResult& r, std::uint32_t n);

// ---------------------------------------------------------------- sampling, light edges

/// Keeps edge {u, v} iff h(index(min, max)) < p with p = 1 / p_den, both
/// endpoints deciding alone. p_den = 1 keeps everything.
Adjacency sample_subgraph(const Adjacency& adj, const KWiseHash& h, std::uint32_t n, std::uint64_t p_den);

struct FLightOptions {
  std::uint32_t k = 0;             // 0: 24 ceil(log2 n)
  std::uint32_t max_retries = 6;   // doublings per phase before RetryExhausted
  std::uint64_t sub_seed = 0;
  bool materialize_nodes = false;
};

struct FLightResult {
  std::vector<std::vector<WeightedEdge>> held;  // index = node id; recovered at leaders
  std::vector<std::uint64_t> set_sizes;         // |L^i_j| for every (phase, component)
  std::uint32_t phases = 0;                     // merging phases plus the closing one
  std::uint32_t retries = 0;
  std::uint64_t rounds = 0;
  std::uint64_t distinct() const;
};

/// Edges of g lighter than the MWOE of their component, per phase of the
/// decomposition, plus every edge leaving a final component.
FLightResult find_f_light(Engine& eng, const BoruvkaResult& decomposition, const Adjacency& g,
                          const FLightOptions& opt = {});

// ---------------------------------------------------------------- load balancing

struct LoadBalanceOptions {
  std::uint32_t c_cap = 32;  // OverCapacity above c_cap log^2 n at a node or c_cap n log n in total
};

struct LoadBalanceResult {
  std::vector<std::vector<WeightedEdge>> held;  // index = node id
  std::uint64_t helpers = 0;
  std::uint64_t rounds = 0;
};

LoadBalanceResult load_balance(Engine& eng, const std::vector<std::vector<WeightedEdge>>& held,
                               const LoadBalanceOptions& opt = {});

// ---------------------------------------------------------------- MSF

struct MsfOptions {
  std::uint64_t seed = 1;
  std::uint32_t k_ind = 0;  // 0: 9 ceil(log2 n)
  std::uint64_t p_den = 0;  // 0: ceil(log2 n)
  std::uint32_t c_cap = 32;
  FLightOptions light;
};

struct MsfLevel {
  std::uint32_t level = 0;
  std::uint64_t edges = 0;       // edges of the sampled graph at this level
  std::uint32_t max_degree = 0;
  std::uint64_t light = 0;       // distinct light edges recovered (0 at the base)
  std::uint32_t retries = 0;
  std::uint32_t boruvka_phases = 0;
  std::uint64_t rounds = 0;
};

struct MsfResult {
  std::vector<std::vector<WeightedEdge>> known;
  std::vector<WeightedEdge> forest;  // sorted by key
  std::uint64_t weight = 0;
  std::uint32_t depth = 0;           // sampling levels below the input
  std::uint32_t depth_bound = 0;     // ceil(log2 D / log2 log2 n) + 1
  std::vector<MsfLevel> levels;      // deepest first
  std::vector<std::uint64_t> light_set_sizes;
  std::uint64_t rounds = 0;
};

MsfResult msf(Engine& eng, const Graph& g, const MsfOptions& opt = {});

}  // namespace ncc
