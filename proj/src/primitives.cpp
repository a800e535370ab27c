#include "ncc/primitives.hpp"

#include <algorithm>
#include <map>

#include "ncc/errors.hpp"

namespace ncc {

namespace {

void check_bounds(const Engine& eng, const std::vector<std::uint64_t>& out,
                  const std::vector<std::uint64_t>& in, std::uint64_t cap) {
  for (NodeId v = 1; v <= eng.n(); ++v) {
    if (in[v] > cap) {
      throw OverloadedDestination("node " + std::to_string(v) + " is destination of " +
                                  std::to_string(in[v]) + " > " + std::to_string(cap) + " messages");
    }
    if (out[v] > cap) {
      throw BudgetViolation("node " + std::to_string(v) + " is source of " +
                            std::to_string(out[v]) + " > " + std::to_string(cap) + " messages");
    }
  }
}

}  // namespace

std::vector<std::vector<Packet>> route(Engine& eng, const std::vector<Packet>& packets,
                                       std::uint32_t c_route) {
  const std::uint32_t n = eng.n();
  const std::uint64_t cap = std::uint64_t{c_route} * eng.budget().max_msgs;
  std::vector<std::uint64_t> out(n + 1, 0);
  std::vector<std::uint64_t> in(n + 1, 0);
  std::vector<Flow> flows;
  flows.reserve(packets.size());
  for (const auto& p : packets) {
    if (p.src < 1 || p.src > n || p.dst < 1 || p.dst > n) throw InvalidConfig("packet endpoint out of range");
    if (p.bits > eng.budget().max_bits_per_msg) {
      throw MessageTooLarge(std::to_string(p.bits) + " bits > B_msg");
    }
    ++out[p.src];
    ++in[p.dst];
    flows.push_back({p.src, p.dst, p.bits});
  }
  check_bounds(eng, out, in, cap);
  eng.exchange(flows);

  std::vector<std::size_t> order(packets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return packets[a].src < packets[b].src; });
  std::vector<std::vector<Packet>> inbox(n + 1);
  for (std::size_t i : order) inbox[packets[i].dst].push_back(packets[i]);
  return inbox;
}

std::vector<std::vector<VirtualMessage>> simulate_virtual_clique(
    Engine& eng, std::uint32_t factor, const std::vector<VirtualMessage>& msgs,
    std::uint32_t budget) {
  const std::uint32_t n = eng.n();
  if (factor < 1) throw InvalidConfig("virtual factor must be at least 1");
  if (budget == 0) budget = eng.budget().max_msgs;
  const std::uint64_t vn = std::uint64_t{factor} * n;
  std::vector<std::uint64_t> out(vn + 1, 0);
  std::vector<std::uint64_t> in(vn + 1, 0);
  for (const auto& m : msgs) {
    if (m.src < 1 || m.src > vn || m.dst < 1 || m.dst > vn) {
      throw InvalidConfig("virtual endpoint out of range");
    }
    if (m.bits > eng.budget().max_bits_per_msg) throw MessageTooLarge(std::to_string(m.bits) + " bits > B_msg");
    if (++out[m.src] > budget) {
      throw BudgetViolation("virtual node " + std::to_string(m.src) + " exceeds its send budget");
    }
    if (++in[m.dst] > budget) {
      throw BudgetViolation("virtual node " + std::to_string(m.dst) + " exceeds its receive budget");
    }
  }

  // Phase (a, b) carries the traffic between slot-a and slot-b virtual nodes.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<Packet>> phases;
  for (std::uint32_t a = 1; a <= factor; ++a) {
    for (std::uint32_t b = a; b <= factor; ++b) phases[{a, b}];
  }
  for (const auto& m : msgs) {
    std::uint32_t a = virtual_slot(m.src, n);
    std::uint32_t b = virtual_slot(m.dst, n);
    if (a > b) std::swap(a, b);
    phases[{a, b}].push_back(Packet{host_of(m.src, n), host_of(m.dst, n), {}, m.bits});
  }
  const std::uint32_t alpha = eng.budget().max_msgs;
  const std::uint32_t c_route = static_cast<std::uint32_t>((2ULL * budget + alpha - 1) / alpha);
  for (auto& [ab, packets] : phases) {
    if (packets.empty()) {
      eng.idle(1);
      continue;
    }
    const std::uint64_t before = eng.rounds();
    route(eng, packets, c_route);
    if (eng.rounds() == before) eng.idle(1);
  }

  std::vector<std::size_t> order(msgs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return msgs[a].src < msgs[b].src; });
  std::vector<std::vector<VirtualMessage>> inbox(vn + 1);
  for (std::size_t i : order) inbox[msgs[i].dst].push_back(msgs[i]);
  return inbox;
}

std::vector<std::vector<VirtualMessage>> bsp_superstep(Engine& eng, std::uint64_t machines,
                                                       std::uint32_t h,
                                                       const std::vector<VirtualMessage>& msgs) {
  const std::uint32_t n = eng.n();
  if (machines < 1) throw InvalidConfig("need at least one machine");
  if (h < 1) throw InvalidConfig("h must be at least 1");
  std::vector<std::uint64_t> out(machines + 1, 0);
  std::vector<std::uint64_t> in(machines + 1, 0);
  for (const auto& m : msgs) {
    if (m.src < 1 || m.src > machines || m.dst < 1 || m.dst > machines) {
      throw InvalidConfig("machine id out of range");
    }
    if (++out[m.src] > h) throw HExceeded("machine " + std::to_string(m.src) + " sends more than " + std::to_string(h));
    if (++in[m.dst] > h) throw HExceeded("machine " + std::to_string(m.dst) + " receives more than " + std::to_string(h));
  }
  const auto factor = static_cast<std::uint32_t>((machines + n - 1) / n);
  auto inbox = simulate_virtual_clique(eng, factor, msgs, std::max(h, eng.budget().max_msgs));
  inbox.resize(machines + 1);
  return inbox;
}

std::vector<std::vector<std::uint64_t>> erew_step(Engine& eng, PramState& state,
                                                  const std::vector<std::vector<PramAccess>>& requests) {
  const std::uint32_t n = eng.n();
  if (requests.size() != state.processors) throw InvalidConfig("one request list per processor expected");
  std::vector<std::uint64_t> owner(state.cells.size(), 0);
  for (std::uint64_t i = 0; i < state.processors; ++i) {
    for (const auto& a : requests[i]) {
      if (a.addr >= state.cells.size()) throw InvalidConfig("address " + std::to_string(a.addr) + " out of range");
      if (owner[a.addr] != 0) {
        throw ExclusivityViolation("cell " + std::to_string(a.addr) + " accessed twice in one step");
      }
      owner[a.addr] = i + 1;
    }
  }
  auto proc_host = [n](std::uint64_t i) { return static_cast<NodeId>(i % n) + 1; };
  auto cell_host = [n](std::uint64_t a) { return static_cast<NodeId>(a % n) + 1; };

  const std::uint32_t addr_bits = id_bits(state.cells.size());
  std::vector<Flow> first;
  std::vector<Flow> second;
  std::vector<std::vector<std::uint64_t>> reads(state.processors);
  for (std::uint64_t i = 0; i < state.processors; ++i) {
    for (const auto& a : requests[i]) {
      const bool write = a.kind == PramAccess::Kind::Write;
      first.push_back({proc_host(i), cell_host(a.addr), addr_bits + (write ? 64U : 0U)});
      if (!write) {
        reads[i].push_back(state.cells[a.addr]);
        second.push_back({cell_host(a.addr), proc_host(i), 64});
      }
    }
  }
  for (std::uint64_t i = 0; i < state.processors; ++i) {
    for (const auto& a : requests[i]) {
      if (a.kind == PramAccess::Kind::Write) state.cells[a.addr] = a.value;
    }
  }
  eng.exchange(first);
  if (!second.empty()) eng.exchange(second);
  return reads;
}

}  // namespace ncc
