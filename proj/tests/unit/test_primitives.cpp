#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "ncc/errors.hpp"
#include "ncc/primitives.hpp"
#include "ncc/sort.hpp"
#include "oracles.hpp"

using namespace ncc;

namespace {

SimConfig cfg_for(std::uint32_t n, std::uint64_t seed = 1) {
  SimConfig c;
  c.n = n;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("route: single message") {
  Engine eng(cfg_for(16));
  auto in = route(eng, {Packet{1, 2, {42}, 8}});
  REQUIRE(in[2].size() == 1);
  CHECK(in[2][0].words[0] == 42);
  CHECK(eng.rounds() >= 1);
  CHECK(eng.rounds() <= 2);
}

TEST_CASE("route: permutation schedule matches direct delivery") {
  Engine eng(cfg_for(64));
  const std::uint32_t a = eng.budget().max_msgs;
  std::vector<Packet> ps;
  for (NodeId v = 1; v <= 64; ++v) {
    for (std::uint32_t j = 0; j < a; ++j) {
      const NodeId dst = static_cast<NodeId>((v - 1 + 7 * j + 1) % 64 + 1);
      ps.push_back(Packet{v, dst, {v * 1000ULL + j}, 20});
    }
  }
  auto in = route(eng, ps);
  CHECK(test::same_deliveries(ps, in));
  CHECK(eng.report().violations == 0);
  CHECK(eng.report().recv_overflows == 0);
}

TEST_CASE("route: one destination receives exactly alpha") {
  Engine eng(cfg_for(128));
  const std::uint32_t a = eng.budget().max_msgs;
  std::vector<Packet> ps;
  for (NodeId v = 2; v <= a + 1; ++v) ps.push_back(Packet{v, 1, {v}, 8});
  auto in = route(eng, ps);
  CHECK(in[1].size() == a);
  CHECK(test::same_deliveries(ps, in));
  ps.push_back(Packet{a + 2, 1, {0}, 8});
  CHECK_THROWS_AS(route(eng, ps), OverloadedDestination);
}

TEST_CASE("virtual clique: factor one is a single routing step") {
  Engine eng(cfg_for(32));
  std::vector<VirtualMessage> ms{{1, 5, {1}, 8}, {6, 2, {2}, 8}};
  auto in = simulate_virtual_clique(eng, 1, ms);
  CHECK(in[5].size() == 1);
  CHECK(in[2].size() == 1);
  CHECK(eng.rounds() == 1);
}

TEST_CASE("virtual clique: empty traffic costs the schedule only") {
  Engine eng(cfg_for(32));
  simulate_virtual_clique(eng, 3, {});
  CHECK(eng.report().total_messages == 0);
  CHECK(eng.rounds() == 6);
}

TEST_CASE("virtual clique equals a flat engine") {
  const std::uint32_t n = 32;
  const std::uint32_t c = 3;
  Engine eng(cfg_for(n));
  Engine flat(cfg_for(n * c));
  std::mt19937_64 rng(5);
  std::vector<VirtualMessage> ms;
  std::vector<std::uint32_t> out(n * c + 1, 0);
  std::vector<std::uint32_t> in(n * c + 1, 0);
  const std::uint32_t budget = eng.budget().max_msgs;
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t s = 1 + rng() % (n * c);
    const std::uint64_t d = 1 + rng() % (n * c);
    if (out[s] == budget || in[d] == budget) continue;
    ++out[s];
    ++in[d];
    const std::uint8_t val = static_cast<std::uint8_t>(rng());
    ms.push_back({s, d, {val}, 8});
    flat.enqueue_send(static_cast<NodeId>(s), static_cast<NodeId>(d), {val}, 8);
  }
  auto got = simulate_virtual_clique(eng, c, ms);
  auto want = flat.advance_round();
  for (std::uint64_t v = 1; v <= n * c; ++v) {
    REQUIRE(got[v].size() == want[v].size());
    for (std::size_t k = 0; k < got[v].size(); ++k) {
      CHECK(got[v][k].src == want[v][k].src);
      CHECK(got[v][k].words[0] == want[v][k].payload[0]);
    }
  }
  CHECK(eng.rounds() <= 4ULL * c * c);
}

TEST_CASE("bsp: successor traffic and the h bound") {
  Engine eng(cfg_for(16));
  std::vector<VirtualMessage> ms;
  for (std::uint64_t m = 1; m <= 40; ++m) ms.push_back({m, m % 40 + 1, {m}, 8});
  auto in = bsp_superstep(eng, 40, 1, ms);
  for (std::uint64_t m = 1; m <= 40; ++m) {
    REQUIRE(in[m % 40 + 1].size() == 1);
    CHECK(in[m % 40 + 1][0].words[0] == m);
  }
  ms.push_back({1, 3, {0}, 8});
  CHECK_THROWS_AS(bsp_superstep(eng, 40, 1, ms), HExceeded);
}

TEST_CASE("erew: own cells, shifted reads and exclusivity") {
  Engine eng(cfg_for(16));
  PramState st{64, std::vector<std::uint64_t>(64, 0)};
  std::vector<std::vector<PramAccess>> w(64);
  for (std::uint64_t i = 0; i < 64; ++i) w[i] = {{PramAccess::Kind::Write, i, i}};
  erew_step(eng, st, w);
  for (std::uint64_t i = 0; i < 64; ++i) CHECK(st.cells[i] == i);

  std::vector<std::vector<PramAccess>> r(64);
  for (std::uint64_t i = 0; i < 64; ++i) r[i] = {{PramAccess::Kind::Read, (i + 5) % 64, 0}};
  auto got = erew_step(eng, st, r);
  for (std::uint64_t i = 0; i < 64; ++i) CHECK(got[i][0] == (i + 5) % 64);

  std::vector<std::vector<PramAccess>> bad(64);
  bad[0] = {{PramAccess::Kind::Write, 7, 1}};
  bad[1] = {{PramAccess::Kind::Write, 7, 2}};
  CHECK_THROWS_AS(erew_step(eng, st, bad), ExclusivityViolation);
}

TEST_CASE("sort: reverse sorted integers") {
  Engine eng(cfg_for(64));
  const std::uint32_t a = eng.budget().max_msgs;
  std::vector<std::vector<std::uint64_t>> keys(64);
  std::uint64_t next = 64ULL * a;
  for (auto& k : keys) {
    for (std::uint32_t j = 0; j < a; ++j) k.push_back(next--);
  }
  auto res = sort_distributed(eng, keys, std::less<>{}, 64);
  std::vector<std::uint64_t> flat;
  for (const auto& s : res.slices) {
    CHECK(s.size() == a);
    flat.insert(flat.end(), s.begin(), s.end());
  }
  std::vector<std::uint64_t> want(64ULL * a);
  std::iota(want.begin(), want.end(), 1);
  CHECK(flat == want);
}

TEST_CASE("sort: random keys keep the multiset") {
  for (std::uint64_t seed : {1, 2, 3}) {
    Engine eng(cfg_for(128, seed));
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::uint64_t>> keys(128);
    std::vector<std::uint64_t> all;
    for (auto& k : keys) {
      const auto cnt = rng() % 20;
      for (std::uint64_t j = 0; j < cnt; ++j) {
        k.push_back(rng());
        all.push_back(k.back());
      }
    }
    auto res = sort_distributed(eng, keys, std::less<>{}, 64);
    std::vector<std::uint64_t> flat;
    for (NodeId v = 1; v <= 128; ++v) {
      const auto& s = res.slices[v - 1];
      flat.insert(flat.end(), s.begin(), s.end());
    }
    std::sort(all.begin(), all.end());
    CHECK(flat == all);
    for (NodeId v = 1; v <= 128; ++v) {
      const auto first = (v - 1) * res.cap;
      if (first >= all.size()) CHECK(res.slices[v - 1].empty());
      else CHECK(res.slices[v - 1].size() == std::min<std::uint64_t>(res.cap, all.size() - first));
    }
  }
}

TEST_CASE("sort: equal keys share a rank") {
  Engine eng(cfg_for(32));
  std::vector<std::vector<int>> keys(32, std::vector<int>(5, 7));
  SortOptions opt;
  opt.ranks = true;
  auto res = sort_distributed(eng, keys, std::less<>{}, 8, opt);
  for (const auto& r : res.ranks) {
    for (auto x : r) CHECK(x == 0);
  }

  std::mt19937_64 rng(4);
  std::vector<std::vector<int>> mixed(32);
  std::vector<int> all;
  for (auto& k : mixed) {
    for (int j = 0; j < 10; ++j) {
      k.push_back(static_cast<int>(rng() % 13));
      all.push_back(k.back());
    }
  }
  Engine eng2(cfg_for(32));
  auto r2 = sort_distributed(eng2, mixed, std::less<>{}, 8, opt);
  std::sort(all.begin(), all.end());
  for (NodeId v = 1; v <= 32; ++v) {
    for (std::size_t j = 0; j < r2.slices[v - 1].size(); ++j) {
      const int x = r2.slices[v - 1][j];
      const auto first = static_cast<std::uint64_t>(std::lower_bound(all.begin(), all.end(), x) - all.begin());
      CHECK(r2.ranks[v - 1][j] == first);
    }
  }
}

TEST_CASE("sort: too many keys") {
  Engine eng(cfg_for(16));
  std::vector<std::vector<int>> keys(16, std::vector<int>(10, 1));
  SortOptions opt;
  opt.cap = 5;
  CHECK_THROWS_AS(sort_distributed(eng, keys, std::less<>{}, 8, opt), TooManyKeys);
}

TEST_CASE("pram cc: edgeless, path and random graphs") {
  {
    Engine eng(cfg_for(16));
    auto cc = pram_connected_components(eng, std::vector<std::vector<CcEdge>>(16), 1);
    for (NodeId v = 1; v <= 16; ++v) CHECK(cc.label[v] == v);
  }
  {
    Engine eng(cfg_for(64));
    std::vector<std::vector<CcEdge>> held(64);
    for (NodeId v = 1; v < 64; ++v) held[v - 1].push_back({v, v + 1});
    auto cc = pram_connected_components(eng, held, 3);
    for (NodeId v = 1; v <= 64; ++v) CHECK(cc.label[v] == cc.label[1]);
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Engine eng(cfg_for(128, seed));
    std::mt19937_64 rng(seed);
    std::vector<std::vector<CcEdge>> held(128);
    test::UnionFind uf(128);
    for (int i = 0; i < 256; ++i) {
      const NodeId u = 1 + rng() % 128;
      const NodeId v = 1 + rng() % 128;
      held[rng() % 128].push_back({u, v});
      uf.unite(u, v);
    }
    auto cc = pram_connected_components(eng, held, seed);
    for (NodeId u = 1; u <= 128; ++u) {
      for (NodeId v = u + 1; v <= 128; ++v) CHECK((cc.label[u] == cc.label[v]) == (uf.find(u) == uf.find(v)));
    }
    std::size_t forest = 0;
    test::UnionFind acyclic(128);
    for (NodeId h = 1; h <= 128; ++h) {
      for (std::size_t k = 0; k < held[h - 1].size(); ++k) {
        CHECK(cc.edge_label[h - 1][k] == cc.label[held[h - 1][k].u]);
        if (cc.in_forest[h - 1][k]) {
          ++forest;
          CHECK(acyclic.unite(held[h - 1][k].u, held[h - 1][k].v));
        }
      }
    }
    CHECK(forest == 128 - uf.components());
  }
}

TEST_CASE("pram sf: cycle of eight and tree input") {
  Engine eng(cfg_for(8));
  std::vector<std::vector<CcEdge>> held(8);
  for (NodeId v = 1; v <= 8; ++v) held[v - 1].push_back({v, v % 8 + 1});
  auto f = pram_spanning_forest(eng, held, 2);
  test::UnionFind uf(8);
  std::size_t cnt = 0;
  for (const auto& h : f) {
    for (const auto& e : h) {
      CHECK(uf.unite(e.u, e.v));
      ++cnt;
    }
  }
  CHECK(cnt == 7);
  CHECK(uf.components() == 1);

  Engine eng2(cfg_for(16));
  std::vector<std::vector<CcEdge>> tree(16);
  for (NodeId v = 2; v <= 16; ++v) tree[v - 1].push_back({v / 2, v});
  auto t = pram_spanning_forest(eng2, tree, 9);
  CHECK(t == tree);
}
