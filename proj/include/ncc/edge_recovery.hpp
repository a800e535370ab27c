#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ncc/engine.hpp"
#include "ncc/graph.hpp"
#include "ncc/group_comm.hpp"
#include "ncc/sketch.hpp"

namespace ncc {

struct KEdgeOptions {
  std::uint32_t c_s = 4;
  std::uint32_t c_dense = 2;
  std::uint64_t sub_seed = 0;
  // Encode one sketch per node and fold them up the trees. Otherwise the
  // leader encodes the summed cut vector directly, which is bit-identical.
  bool materialize_nodes = false;
  // Throw PromiseViolated on the first DENSE leader instead of flagging it.
  bool throw_on_dense = true;
  // Sketch values carry w + 1 so recovered edges keep their weights.
  bool carry_weights = false;
};

struct KEdgeResult {
  std::vector<std::vector<WeightedEdge>> edges;  // index = node id; filled at leaders, sorted by key
  std::vector<char> dense;      // index = node id; set at leaders that decoded DENSE
  std::uint64_t seed_bits = 0;
  std::uint64_t sketch_bits = 0;
  std::uint64_t rounds = 0;
};

/// Every leader of the partition learns the edges leaving its set, given
/// at most k of them. adj[v] lists the edges node v knows (index = id).
/// Pass `trees` to reuse communication trees built for the same partition.
KEdgeResult k_edge_recovery(Engine& eng, const Partition& p, const Adjacency& adj,
                            std::uint32_t k, const KEdgeOptions& opt = {}, const CommForest* trees = nullptr);

/// Sketch of each set's cut vector at its leader (index = node id).
/// materialize: one sketch per member folded up the trees; otherwise the
/// leader encodes the netted sum of its members' updates.
std::vector<LinearSketch> set_sketches(const CommForest* f, const Partition& p, const Adjacency& adj,
                                       const SketchParams& params, bool carry_weights, bool materialize);

/// Folds broadcast words into the 64-bit seed all nodes derive hashes from.
std::uint64_t seed_from_words(const std::vector<std::uint64_t>& words);

}  // namespace ncc
