#pragma once

#include <cstdint>
#include <vector>

#include "ncc/engine.hpp"

namespace ncc {

/// A routed message: payload words plus the number of meaningful bits.
struct Packet {
  NodeId src = 0;
  NodeId dst = 0;
  std::vector<std::uint64_t> words;
  std::uint32_t bits = 0;

  bool operator==(const Packet&) const = default;
};

/// Delivers every packet. Each node may be source and destination of at most
/// c_route * max_msgs packets. Result index = destination id; each inbox is
/// ordered by (src, submission order).
std::vector<std::vector<Packet>> route(Engine& eng, const std::vector<Packet>& packets,
                                       std::uint32_t c_route = 1);

struct VirtualMessage {
  std::uint64_t src = 0;
  std::uint64_t dst = 0;
  std::vector<std::uint64_t> words;
  std::uint32_t bits = 0;

  bool operator==(const VirtualMessage&) const = default;
};

/// Position of virtual node v in the local list of its host, 1-based.
constexpr std::uint32_t virtual_slot(std::uint64_t v, std::uint32_t n) noexcept {
  return static_cast<std::uint32_t>((v - 1) / n) + 1;
}

/// One round of a clique on factor * n virtual nodes, each bounded by
/// `budget` sends and receives (0 means max_msgs). Inboxes are indexed by
/// virtual id and ordered by (src, submission order).
std::vector<std::vector<VirtualMessage>> simulate_virtual_clique(
    Engine& eng, std::uint32_t factor, const std::vector<VirtualMessage>& msgs,
    std::uint32_t budget = 0);

/// One BSP superstep over `machines` machines (ids 1..machines), each sending
/// and receiving at most h messages.
std::vector<std::vector<VirtualMessage>> bsp_superstep(Engine& eng, std::uint64_t machines,
                                                       std::uint32_t h,
                                                       const std::vector<VirtualMessage>& msgs);

struct PramAccess {
  enum class Kind : std::uint8_t { Read, Write };
  Kind kind = Kind::Read;
  std::uint64_t addr = 0;
  std::uint64_t value = 0;
};

/// Processor i (0-based) lives on node (i mod n) + 1, cell a on (a mod n) + 1.
struct PramState {
  std::uint64_t processors = 0;
  std::vector<std::uint64_t> cells;
};

/// One exclusive-read exclusive-write step. Returns, per processor, the
/// values of its reads in request order.
std::vector<std::vector<std::uint64_t>> erew_step(Engine& eng, PramState& state,
                                                  const std::vector<std::vector<PramAccess>>& requests);

struct CcEdge {
  NodeId u = 0;
  NodeId v = 0;

  bool operator==(const CcEdge&) const = default;
};

struct CcResult {
  std::vector<NodeId> label;                     // index = vertex id
  std::vector<std::vector<NodeId>> edge_label;   // [holder - 1][edge]
  std::vector<std::vector<char>> in_forest;      // [holder - 1][edge]
  std::uint32_t iterations = 0;
};

/// Random-mate hook and contract over edges held by nodes (held[i] is the
/// list of node i + 1). Vertex x's cell lives on node x.
CcResult pram_connected_components(Engine& eng, const std::vector<std::vector<CcEdge>>& held,
                                   std::uint64_t seed);

/// Forest edges selected by pram_connected_components, left at their holders.
std::vector<std::vector<CcEdge>> pram_spanning_forest(Engine& eng,
                                                      const std::vector<std::vector<CcEdge>>& held,
                                                      std::uint64_t seed);

}  // namespace ncc
