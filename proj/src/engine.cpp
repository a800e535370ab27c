#include "ncc/engine.hpp"

#include <algorithm>
#include <bit>
#include <ostream>

#include <nlohmann/json.hpp>

#include "ncc/errors.hpp"

namespace ncc {

std::uint32_t ceil_log2(std::uint64_t x) noexcept {
  if (x <= 2) return 1;
  return static_cast<std::uint32_t>(std::bit_width(x - 1));
}

std::uint32_t id_bits(std::uint64_t x) noexcept {
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::bit_width(x)));
}

void SimConfig::validate() const {
  if (n < 2) throw InvalidConfig("n must be at least 2");
  if (c_msg < 1) throw InvalidConfig("c_msg must be at least 1");
  if (c_bits < 1) throw InvalidConfig("c_bits must be at least 1");
}

Engine::Engine(const SimConfig& config) : config_(config) {
  config_.validate();
  log_n_ = ceil_log2(config_.n);
  budget_.max_msgs = config_.c_msg * log_n_;
  budget_.max_bits_per_msg = config_.c_bits * log_n_;
  sent_this_round_.assign(config_.n + 1, 0);
}

std::uint64_t Engine::units(std::uint64_t bits) const noexcept {
  const std::uint64_t b = budget_.max_bits_per_msg;
  return bits == 0 ? 1 : (bits + b - 1) / b;
}

void Engine::check_node(NodeId id, const char* what) const {
  if (id < 1 || id > config_.n) {
    throw InvalidConfig(std::string(what) + " id " + std::to_string(id) + " out of range");
  }
}

void Engine::enqueue_send(NodeId src, NodeId dst, std::vector<std::uint8_t> payload,
                          std::uint32_t bit_len) {
  check_node(src, "source");
  check_node(dst, "destination");
  if (bit_len > 8 * payload.size()) {
    throw MessageTooLarge("declared " + std::to_string(bit_len) + " bits exceed payload");
  }
  if (bit_len > budget_.max_bits_per_msg) {
    throw MessageTooLarge(std::to_string(bit_len) + " bits > B_msg = " +
                          std::to_string(budget_.max_bits_per_msg));
  }
  if (sent_this_round_[src] >= budget_.max_msgs) {
    if (config_.strict_budget) {
      throw BudgetViolation("node " + std::to_string(src) + " exceeds " +
                            std::to_string(budget_.max_msgs) + " sends in round " +
                            std::to_string(report_.rounds + 1));
    }
    ++report_.violations;
  }
  ++sent_this_round_[src];
  pending_.push_back(Message{src, dst, std::move(payload), bit_len});
}

void Engine::enqueue_send(NodeId src, NodeId dst, std::vector<std::uint8_t> payload) {
  const auto bits = static_cast<std::uint32_t>(8 * payload.size());
  enqueue_send(src, dst, std::move(payload), bits);
}

void Engine::note_round(std::span<const std::uint32_t> sent, std::span<const std::uint32_t> recv) {
  ++report_.rounds;
  for (std::size_t v = 1; v < sent.size(); ++v) {
    report_.max_sent_per_node_round = std::max(report_.max_sent_per_node_round, sent[v]);
    report_.max_recv_per_node_round = std::max(report_.max_recv_per_node_round, recv[v]);
    if (recv[v] > budget_.max_msgs) {
      if (config_.strict_recv) {
        ++report_.violations;
        throw BudgetViolation("node " + std::to_string(v) + " receives " +
                              std::to_string(recv[v]) + " messages in round " +
                              std::to_string(report_.rounds));
      }
      ++report_.recv_overflows;
    }
  }
  if (observer_) observer_(report_.rounds, sent, recv);
}

std::vector<std::vector<Message>> Engine::advance_round() {
  std::vector<std::vector<Message>> inboxes(config_.n + 1);
  std::vector<std::uint32_t> recv(config_.n + 1, 0);
  // stable sort keeps enqueue order among equal sources
  std::stable_sort(pending_.begin(), pending_.end(),
                   [](const Message& a, const Message& b) { return a.src < b.src; });
  const std::uint64_t round = report_.rounds + 1;
  for (auto& m : pending_) {
    ++recv[m.dst];
    ++report_.total_messages;
    report_.total_bits += m.bit_len;
    if (trace_ != nullptr) *trace_ << round << ',' << m.src << ',' << m.dst << ',' << m.bit_len << '\n';
    inboxes[m.dst].push_back(std::move(m));
  }
  pending_.clear();
  note_round(sent_this_round_, recv);
  std::fill(sent_this_round_.begin(), sent_this_round_.end(), 0);
  return inboxes;
}

std::uint64_t Engine::exchange(std::span<const Flow> flows, std::uint64_t repeat) {
  if (repeat == 0) return 0;
  struct Pending {
    NodeId src;
    NodeId dst;
    std::uint64_t units;
    std::uint64_t bits;
  };
  std::vector<Pending> pend;
  pend.reserve(flows.size());
  for (const auto& f : flows) {
    check_node(f.src, "flow source");
    check_node(f.dst, "flow destination");
    if (f.src == f.dst) continue;  // local, free
    pend.push_back({f.src, f.dst, units(f.bits), std::max<std::uint64_t>(f.bits, 1)});
  }
  if (pend.empty()) return 0;

  const std::uint32_t cap = budget_.max_msgs;
  const std::uint64_t b = budget_.max_bits_per_msg;
  std::vector<std::uint32_t> sent(config_.n + 1, 0);
  std::vector<std::uint32_t> recv(config_.n + 1, 0);
  const std::uint64_t first = report_.rounds;
  std::uint64_t msgs = 0;
  std::uint64_t bits = 0;
  std::size_t offset = 0;
  while (!pend.empty()) {
    std::fill(sent.begin(), sent.end(), 0);
    std::fill(recv.begin(), recv.end(), 0);
    const std::size_t m = pend.size();
    for (std::size_t i = 0; i < m; ++i) {
      auto& p = pend[(i + offset) % m];
      const std::uint64_t room = std::min(cap - sent[p.src], cap - recv[p.dst]);
      const std::uint64_t take = std::min(room, p.units);
      if (take == 0) continue;
      sent[p.src] += static_cast<std::uint32_t>(take);
      recv[p.dst] += static_cast<std::uint32_t>(take);
      const std::uint64_t moved = std::min(p.bits, take * b);
      if (trace_ != nullptr) {
        std::uint64_t left = moved;
        for (std::uint64_t u = 0; u < take; ++u) {
          const std::uint64_t piece = std::min(left, b);
          *trace_ << report_.rounds + 1 << ',' << p.src << ',' << p.dst << ',' << piece << '\n';
          left -= piece;
        }
      }
      p.units -= take;
      p.bits -= moved;
      msgs += take;
      bits += moved;
    }
    note_round(sent, recv);
    std::erase_if(pend, [](const Pending& p) { return p.units == 0; });
    offset = pend.empty() ? 0 : (offset + 1) % pend.size();
  }
  const std::uint64_t used = report_.rounds - first;
  report_.rounds += used * (repeat - 1);
  report_.total_messages += msgs * repeat;
  report_.total_bits += bits * repeat;
  return used * repeat;
}

void Engine::idle(std::uint64_t count) {
  if (count == 0) return;
  std::vector<std::uint32_t> zero(config_.n + 1, 0);
  note_round(zero, zero);
  report_.rounds += count - 1;
}

Rng Engine::node_rng(NodeId id, std::uint64_t stream) const {
  return Rng(derive_seed(config_.seed, id, stream));
}

void NodeContext::send(NodeId dst, std::vector<std::uint8_t> payload, std::uint32_t bit_len) {
  if (bit_len == 0) bit_len = static_cast<std::uint32_t>(8 * payload.size());
  engine_->enqueue_send(id_, dst, std::move(payload), bit_len);
}

void NodeContext::charge(std::uint64_t steps) {
  steps_ += steps;
  if (step_cap_ != 0 && steps_ > step_cap_) {
    throw BudgetViolation("node " + std::to_string(id_) + " exceeds local step cap " +
                          std::to_string(step_cap_));
  }
}

struct ProtocolRunner {
  static ProtocolResult run(const SimConfig& config, const NodeProgram& program,
                            const std::vector<std::vector<std::uint8_t>>& inputs,
                            std::ostream* trace) {
    Engine engine(config);
    engine.set_trace(trace);
    const std::uint32_t n = config.n;
    if (inputs.size() != n) throw InvalidConfig("expected one input per node");
    ProtocolResult result;
    result.outputs.assign(n, {});
    std::vector<Rng> rngs;
    rngs.reserve(n);
    for (NodeId v = 1; v <= n; ++v) rngs.push_back(engine.node_rng(v));
    std::vector<char> halted(n + 1, 0);
    std::vector<std::vector<Message>> inboxes(n + 1);
    const std::uint64_t lg = engine.log_n();
    const std::uint64_t cap = config.local_step_factor * n * lg * lg;

    for (std::uint64_t phase = 0;; ++phase) {
      for (NodeId v = 1; v <= n; ++v) {
        if (halted[v]) continue;
        bool h = false;
        NodeContext ctx;
        ctx.engine_ = &engine;
        ctx.id_ = v;
        ctx.n_ = n;
        ctx.round_ = phase;
        ctx.inbox_ = inboxes[v];
        ctx.input_ = &inputs[v - 1];
        ctx.output_ = &result.outputs[v - 1];
        ctx.rng_ = &rngs[v - 1];
        ctx.halted_ = &h;
        ctx.step_cap_ = cap;
        program(ctx);
        halted[v] = h ? 1 : 0;
      }
      const bool all_halted =
          std::all_of(halted.begin() + 1, halted.end(), [](char c) { return c != 0; });
      if (!engine.has_pending() && all_halted) break;
      inboxes = engine.advance_round();
      if (engine.rounds() > config.max_rounds) {
        throw NonTermination("exceeded " + std::to_string(config.max_rounds) + " rounds");
      }
    }
    result.report = engine.report();
    return result;
  }
};

ProtocolResult run_protocol(const SimConfig& config, const NodeProgram& program,
                            const std::vector<std::vector<std::uint8_t>>& inputs,
                            std::ostream* trace) {
  return ProtocolRunner::run(config, program, inputs, trace);
}

std::string to_json(const RoundReport& r) {
  nlohmann::ordered_json j;
  j["rounds"] = r.rounds;
  j["total_messages"] = r.total_messages;
  j["total_bits"] = r.total_bits;
  j["max_sent_per_node_round"] = r.max_sent_per_node_round;
  j["max_recv_per_node_round"] = r.max_recv_per_node_round;
  j["violations"] = r.violations;
  j["recv_overflows"] = r.recv_overflows;
  return j.dump();
}

}  // namespace ncc
