#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "ncc/engine.hpp"
#include "ncc/errors.hpp"

using namespace ncc;

namespace {

std::vector<std::vector<std::uint8_t>> empty_inputs(std::uint32_t n) { return std::vector<std::vector<std::uint8_t>>(n); }

}  // namespace

TEST_CASE("echo program uses no rounds") {
  SimConfig cfg;
  cfg.n = 4;
  std::vector<std::vector<std::uint8_t>> in{{1}, {2, 3}, {}, {9}};
  auto res = run_protocol(cfg, [](NodeContext& ctx) {
    ctx.output() = ctx.input();
    ctx.halt();
  }, in);
  CHECK(res.report.rounds == 0);
  CHECK(res.outputs == in);
}

TEST_CASE("ring forward for three rounds sends 24 messages") {
  SimConfig cfg;
  cfg.n = 8;
  auto res = run_protocol(cfg, [](NodeContext& ctx) {
    if (ctx.round() < 3) {
      ctx.send(ctx.id() % ctx.n() + 1, {static_cast<std::uint8_t>(ctx.id())});
    } else {
      ctx.halt();
    }
  }, empty_inputs(8));
  CHECK(res.report.total_messages == 24);
  CHECK(res.report.rounds == 3);
  CHECK(res.report.violations == 0);
}

TEST_CASE("flooding from one node breaks the send budget") {
  SimConfig cfg;
  cfg.n = 64;
  cfg.c_msg = 1;
  auto flood = [](NodeContext& ctx) {
    if (ctx.id() == 1 && ctx.round() == 0) {
      for (NodeId v = 2; v <= ctx.n(); ++v) ctx.send(v, {1});
    }
    ctx.halt();
  };
  CHECK_THROWS_AS(run_protocol(cfg, flood, empty_inputs(64)), BudgetViolation);
}

TEST_CASE("message size boundary") {
  SimConfig cfg;
  cfg.n = 16;
  Engine eng(cfg);
  const std::uint32_t b = eng.budget().max_bits_per_msg;
  CHECK(b == 32);
  eng.enqueue_send(1, 2, std::vector<std::uint8_t>(b / 8), b);
  CHECK_THROWS_AS(eng.enqueue_send(1, 2, std::vector<std::uint8_t>(b / 8 + 1), b + 1), MessageTooLarge);
  auto in = eng.advance_round();
  REQUIRE(in[2].size() == 1);
  CHECK(in[2][0].bit_len == b);
}

TEST_CASE("single byte arrives next round") {
  SimConfig cfg;
  cfg.n = 4;
  Engine eng(cfg);
  eng.enqueue_send(1, 2, {0x5a});
  auto in = eng.advance_round();
  REQUIRE(in[2].size() == 1);
  CHECK(in[2][0].payload == std::vector<std::uint8_t>{0x5a});
  CHECK(eng.rounds() == 1);
}

TEST_CASE("empty round still advances the counter") {
  SimConfig cfg;
  cfg.n = 4;
  Engine eng(cfg);
  auto in = eng.advance_round();
  CHECK(eng.rounds() == 1);
  for (const auto& box : in) CHECK(box.empty());
}

TEST_CASE("inbox ordered by source") {
  SimConfig cfg;
  cfg.n = 8;
  Engine eng(cfg);
  eng.enqueue_send(7, 3, {7});
  eng.enqueue_send(2, 3, {2});
  eng.enqueue_send(7, 3, {8});
  auto in = eng.advance_round();
  REQUIRE(in[3].size() == 3);
  CHECK(in[3][0].src == 2);
  CHECK(in[3][1].payload[0] == 7);
  CHECK(in[3][2].payload[0] == 8);
}

TEST_CASE("delivered multiset equals sent multiset") {
  SimConfig cfg;
  cfg.n = 128;
  Engine eng(cfg);
  std::mt19937_64 rng(11);
  std::vector<std::uint32_t> sent_now(cfg.n + 1, 0);
  std::vector<std::uint32_t> recv_now(cfg.n + 1, 0);
  std::vector<std::tuple<NodeId, NodeId, std::uint32_t>> sent;
  std::vector<std::tuple<NodeId, NodeId, std::uint32_t>> got;
  eng.set_round_observer([&](std::uint64_t, std::span<const std::uint32_t> s, std::span<const std::uint32_t> r) {
    for (std::size_t v = 1; v < s.size(); ++v) {
      CHECK(s[v] <= eng.budget().max_msgs);
      CHECK(r[v] <= eng.budget().max_msgs);
    }
  });
  std::uint32_t count = 0;
  while (count < 10000) {
    const NodeId a = 1 + rng() % cfg.n;
    const NodeId b = 1 + rng() % cfg.n;
    if (sent_now[a] == eng.budget().max_msgs || recv_now[b] == eng.budget().max_msgs) {
      for (auto& box : eng.advance_round()) {
        for (auto& m : box) {
          std::uint32_t x = 0;
          for (int i = 0; i < 4; ++i) x |= std::uint32_t{m.payload[i]} << (8 * i);
          got.emplace_back(m.src, m.dst, x);
        }
      }
      std::fill(sent_now.begin(), sent_now.end(), 0);
      std::fill(recv_now.begin(), recv_now.end(), 0);
      continue;
    }
    std::vector<std::uint8_t> p(4);
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(count >> (8 * i));
    eng.enqueue_send(a, b, p);
    sent.emplace_back(a, b, count);
    ++sent_now[a];
    ++recv_now[b];
    ++count;
  }
  for (auto& box : eng.advance_round()) {
    for (auto& m : box) {
      std::uint32_t x = 0;
      for (int i = 0; i < 4; ++i) x |= std::uint32_t{m.payload[i]} << (8 * i);
      got.emplace_back(m.src, m.dst, x);
    }
  }
  std::sort(sent.begin(), sent.end());
  std::sort(got.begin(), got.end());
  CHECK(sent == got);
  CHECK(eng.report().violations == 0);
  CHECK(eng.report().recv_overflows == 0);
}

TEST_CASE("identical config and inputs replay identically") {
  SimConfig cfg;
  cfg.n = 32;
  cfg.seed = 99;
  auto prog = [](NodeContext& ctx) {
    if (ctx.round() < 4) {
      const auto dst = static_cast<NodeId>(1 + ctx.rng()() % ctx.n());
      ctx.send(dst, {static_cast<std::uint8_t>(ctx.id())});
      for (const auto& m : ctx.inbox()) ctx.output().push_back(m.payload[0]);
    } else {
      ctx.halt();
    }
  };
  std::ostringstream t1;
  std::ostringstream t2;
  auto a = run_protocol(cfg, prog, empty_inputs(32), &t1);
  auto b = run_protocol(cfg, prog, empty_inputs(32), &t2);
  CHECK(a.outputs == b.outputs);
  CHECK(a.report == b.report);
  CHECK(t1.str() == t2.str());
  CHECK(to_json(a.report) == to_json(b.report));
}

TEST_CASE("node output ignores unrelated inputs") {
  SimConfig cfg;
  cfg.n = 16;
  // Node v forwards its input to v + 1; node 5 sees only node 4's input.
  auto prog = [](NodeContext& ctx) {
    if (ctx.round() == 0) {
      if (ctx.id() < ctx.n()) ctx.send(ctx.id() + 1, ctx.input());
    } else {
      for (const auto& m : ctx.inbox()) ctx.output() = m.payload;
      ctx.halt();
    }
  };
  std::vector<std::vector<std::uint8_t>> in(16);
  for (std::uint32_t i = 0; i < 16; ++i) in[i] = {static_cast<std::uint8_t>(i)};
  auto base = run_protocol(cfg, prog, in);
  auto permuted = in;
  std::swap(permuted[9], permuted[12]);
  auto other = run_protocol(cfg, prog, permuted);
  CHECK(base.outputs[4] == other.outputs[4]);
}

TEST_CASE("non-terminating program is cut off") {
  SimConfig cfg;
  cfg.n = 4;
  cfg.max_rounds = 10;
  CHECK_THROWS_AS(run_protocol(cfg, [](NodeContext& ctx) { ctx.send(1, {0}); }, empty_inputs(4)), NonTermination);
}

TEST_CASE("strict receive mode rejects an overloaded inbox") {
  SimConfig cfg;
  cfg.n = 64;
  cfg.c_msg = 1;
  cfg.strict_recv = true;
  Engine eng(cfg);
  for (NodeId v = 2; v <= 10; ++v) eng.enqueue_send(v, 1, {0});
  CHECK_THROWS_AS(eng.advance_round(), BudgetViolation);

  cfg.strict_recv = false;
  Engine lax(cfg);
  for (NodeId v = 2; v <= 10; ++v) lax.enqueue_send(v, 1, {0});
  lax.advance_round();
  CHECK(lax.report().recv_overflows == 1);
}

TEST_CASE("exchange respects both budgets and repeats") {
  SimConfig cfg;
  cfg.n = 64;
  Engine eng(cfg);
  const auto cap = eng.budget().max_msgs;
  eng.set_round_observer([&](std::uint64_t, std::span<const std::uint32_t> s, std::span<const std::uint32_t> r) {
    for (std::size_t v = 1; v < s.size(); ++v) {
      CHECK(s[v] <= cap);
      CHECK(r[v] <= cap);
    }
  });
  std::vector<Flow> flows;
  for (NodeId v = 2; v <= 64; ++v) flows.push_back({v, 1, 10});
  const auto r = eng.exchange(flows);
  CHECK(r == (63 + cap - 1) / cap);
  const auto before = eng.report();
  const auto r3 = eng.exchange(flows, 3);
  CHECK(r3 == 3 * r);
  CHECK(eng.report().total_messages - before.total_messages == 3 * 63);
  CHECK(eng.exchange(std::vector<Flow>{{5, 5, 1000}}) == 0);
}

TEST_CASE("report json keeps its key order") {
  RoundReport r;
  r.rounds = 3;
  CHECK(to_json(r) ==
        R"({"rounds":3,"total_messages":0,"total_bits":0,"max_sent_per_node_round":0,"max_recv_per_node_round":0,"violations":0,"recv_overflows":0})");
}
