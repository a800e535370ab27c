#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ncc/rng.hpp"

namespace ncc {

/// Node identifiers are 1-based: a clique of size n uses ids 1..n.
using NodeId = std::uint32_t;

/// ceil(log2(x)) for x >= 1, clamped below at 1 so budgets never vanish.
std::uint32_t ceil_log2(std::uint64_t x) noexcept;

/// Bits needed to write any id in [0, x].
std::uint32_t id_bits(std::uint64_t x) noexcept;

/// Host of a virtual node: ids congruent modulo n share a real node.
constexpr NodeId host_of(std::uint64_t virtual_id, std::uint32_t n) noexcept {
  return static_cast<NodeId>((virtual_id - 1) % n) + 1;
}

struct SimConfig {
  std::uint32_t n = 2;
  std::uint64_t seed = 1;
  std::uint32_t c_msg = 4;   // max_msgs = c_msg * ceil(log2 n)
  std::uint32_t c_bits = 8;  // B_msg = c_bits * ceil(log2 n)
  bool strict_budget = true;
  bool strict_recv = false;
  std::uint64_t max_rounds = std::uint64_t{1} << 40;
  // Per-node cap on elementary steps in one local phase, in units of
  // n * ceil(log2 n)^2. Zero disables the check.
  std::uint64_t local_step_factor = 0;

  void validate() const;
};

struct RoundBudget {
  std::uint32_t max_msgs = 0;
  std::uint32_t max_bits_per_msg = 0;
};

struct Message {
  NodeId src = 0;
  NodeId dst = 0;
  std::vector<std::uint8_t> payload;
  std::uint32_t bit_len = 0;
};

struct RoundReport {
  std::uint64_t rounds = 0;
  std::uint64_t total_messages = 0;
  std::uint64_t total_bits = 0;
  std::uint32_t max_sent_per_node_round = 0;
  std::uint32_t max_recv_per_node_round = 0;
  std::uint64_t violations = 0;
  // Receive-side overruns seen while strict_recv is off. Counted, not fatal.
  std::uint64_t recv_overflows = 0;

  bool operator==(const RoundReport&) const = default;
};

/// A logical transfer of `bits` from src to dst; the engine splits it into
/// ceil(bits / B_msg) messages and schedules them under the round budget.
struct Flow {
  NodeId src = 0;
  NodeId dst = 0;
  std::uint64_t bits = 0;
};

/// Synchronous round engine for the node-congested clique.
///
/// Two ways of driving it coexist. The message API (enqueue_send /
/// advance_round) moves explicit byte payloads, one round at a time. The
/// bulk API (exchange) accounts for a set of flows whose contents the caller
/// moves itself; it packs their messages greedily into as many rounds as
/// the per-node send and receive budgets require.
class Engine {
 public:
  explicit Engine(const SimConfig& config);

  std::uint32_t n() const noexcept { return config_.n; }
  const SimConfig& config() const noexcept { return config_; }
  const RoundBudget& budget() const noexcept { return budget_; }
  const RoundReport& report() const noexcept { return report_; }
  std::uint64_t rounds() const noexcept { return report_.rounds; }
  std::uint32_t log_n() const noexcept { return log_n_; }

  /// Number of messages needed to carry `bits` (at least one).
  std::uint64_t units(std::uint64_t bits) const noexcept;

  void enqueue_send(NodeId src, NodeId dst, std::vector<std::uint8_t> payload,
                    std::uint32_t bit_len);
  void enqueue_send(NodeId src, NodeId dst, std::vector<std::uint8_t> payload);

  /// Ends the current round: delivers every queued message exactly once.
  /// Inboxes (index = NodeId, slot 0 unused) are ordered by (src, enqueue order).
  std::vector<std::vector<Message>> advance_round();
  bool has_pending() const noexcept { return !pending_.empty(); }

  /// Schedules the flows; returns the rounds consumed. `repeat` accounts the
  /// same pattern that many times back to back.
  std::uint64_t exchange(std::span<const Flow> flows, std::uint64_t repeat = 1);

  /// Accounts `count` synchronous rounds in which nothing is sent.
  void idle(std::uint64_t count);

  /// Private random stream of a node, derived from (seed, id, stream).
  Rng node_rng(NodeId id, std::uint64_t stream = 0) const;

  void set_trace(std::ostream* out) noexcept { trace_ = out; }

  /// Per-round hook; tests use it to assert invariants after every round.
  using RoundObserver = std::function<void(std::uint64_t round, std::span<const std::uint32_t> sent,
                                           std::span<const std::uint32_t> recv)>;
  void set_round_observer(RoundObserver obs) { observer_ = std::move(obs); }

 private:
  void note_round(std::span<const std::uint32_t> sent, std::span<const std::uint32_t> recv);
  void check_node(NodeId id, const char* what) const;

  SimConfig config_;
  std::uint32_t log_n_;
  RoundBudget budget_;
  RoundReport report_;
  std::vector<Message> pending_;
  std::vector<std::uint32_t> sent_this_round_;
  std::ostream* trace_ = nullptr;
  RoundObserver observer_;
};

/// View handed to a node program during one local phase.
class NodeContext {
 public:
  NodeId id() const noexcept { return id_; }
  std::uint32_t n() const noexcept { return n_; }
  std::uint64_t round() const noexcept { return round_; }
  std::span<const Message> inbox() const noexcept { return inbox_; }
  const std::vector<std::uint8_t>& input() const noexcept { return *input_; }
  std::vector<std::uint8_t>& output() noexcept { return *output_; }
  Rng& rng() noexcept { return *rng_; }

  void send(NodeId dst, std::vector<std::uint8_t> payload, std::uint32_t bit_len = 0);
  void halt() noexcept { *halted_ = true; }
  /// Charges local work against the per-phase step cap.
  void charge(std::uint64_t steps);

 private:
  friend struct ProtocolRunner;
  Engine* engine_ = nullptr;
  NodeId id_ = 0;
  std::uint32_t n_ = 0;
  std::uint64_t round_ = 0;
  std::span<const Message> inbox_;
  const std::vector<std::uint8_t>* input_ = nullptr;
  std::vector<std::uint8_t>* output_ = nullptr;
  Rng* rng_ = nullptr;
  bool* halted_ = nullptr;
  std::uint64_t steps_ = 0;
  std::uint64_t step_cap_ = 0;
};

using NodeProgram = std::function<void(NodeContext&)>;

struct ProtocolResult {
  std::vector<std::vector<std::uint8_t>> outputs;  // index = NodeId - 1
  RoundReport report;
};

/// Runs `program` on every node until all halt and no message is in flight.
/// inputs[i] is the input of node i + 1.
ProtocolResult run_protocol(const SimConfig& config, const NodeProgram& program,
                            const std::vector<std::vector<std::uint8_t>>& inputs,
                            std::ostream* trace = nullptr);

std::string to_json(const RoundReport& report);

}  // namespace ncc
