#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "ncc/errors.hpp"
#include "ncc/forest.hpp"
#include "ncc/graph.hpp"
#include "oracles.hpp"

using namespace ncc;

namespace {

SimConfig cfg_for(std::uint32_t n, std::uint64_t seed = 1) {
  SimConfig c;
  c.n = n;
  c.seed = seed;
  return c;
}

std::vector<test::WEdge> to_w(const std::vector<WeightedEdge>& es) {
  std::vector<test::WEdge> out;
  for (const auto& e : es) out.push_back({e.u, e.v, e.w});
  return out;
}

std::vector<WeightedEdge> kruskal_of(const Graph& g) {
  std::vector<WeightedEdge> out;
  for (const auto& e : test::kruskal(g.n, to_w(g.edges))) out.push_back({e.u, e.v, e.w});
  return canonical_edges(out);
}

/// Each edge held at its smaller endpoint.
std::vector<std::vector<WeightedEdge>> held_at_min(const Graph& g) {
  std::vector<std::vector<WeightedEdge>> held(g.n + 1);
  for (const auto& e : g.edges) held[std::min(e.u, e.v)].push_back(normalized(e));
  return held;
}

/// Round-robin placement, a few edges per node.
std::vector<std::vector<WeightedEdge>> held_spread(const Graph& g) {
  std::vector<std::vector<WeightedEdge>> held(g.n + 1);
  for (std::size_t i = 0; i < g.edges.size(); ++i) held[i % g.n + 1].push_back(g.edges[i]);
  return held;
}

bool same_partition(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::map<NodeId, NodeId> ab;
  std::map<NodeId, NodeId> ba;
  for (std::size_t v = 1; v < a.size(); ++v) {
    if (ab.emplace(a[v], b[v]).first->second != b[v]) return false;
    if (ba.emplace(b[v], a[v]).first->second != a[v]) return false;
  }
  return true;
}

std::vector<Graph> sample_graphs(std::uint32_t n, std::uint64_t seed) {
  const std::uint64_t pairs = std::uint64_t{n} * (n - 1) / 2;
  std::vector<Graph> gs;
  gs.push_back(gen_graph({"gnm", n, std::min<std::uint64_t>(pairs, 2ULL * n), 0, 0, 0, seed}));
  gs.push_back(gen_graph({"gnm", n, n / 2, 0, 0, 0, seed + 1}));  // many components
  gs.push_back(gen_graph({"path", n, 0, 0, 0, 0, seed + 2}));
  gs.push_back(gen_graph({"star", n, 0, 0, 0, 0, seed + 3}));
  gs.push_back(gen_graph({"gnm", n, 0, 0, 0, 0, seed + 4}));      // no edges
  gs.push_back(gen_graph({"gnm", n, std::min<std::uint64_t>(pairs, 3ULL * n), 0, 0, 0, seed + 5, 4}));  // many equal weights
  return gs;
}

}  // namespace

TEST_CASE("resolve_labels answers every query, including runs spanning many nodes") {
  for (std::uint32_t n : {2U, 9U, 32U, 64U}) {
    std::mt19937_64 rng(n);
    std::vector<NodeId> label(n + 1);
    for (NodeId v = 1; v <= n; ++v) label[v] = static_cast<NodeId>(rng() % n + 1);
    std::vector<std::vector<NodeId>> q(n + 1);
    for (NodeId h = 1; h <= n; ++h) {
      const auto cnt = rng() % (3 * ceil_log2(n));
      for (std::uint64_t i = 0; i < cnt; ++i) q[h].push_back(rng() % 4 == 0 ? 1 : static_cast<NodeId>(rng() % n + 1));
    }
    Engine eng(cfg_for(n));
    const auto got = resolve_labels(eng, q, label);
    for (NodeId h = 1; h <= n; ++h) {
      REQUIRE(got[h].size() == q[h].size());
      for (std::size_t i = 0; i < q[h].size(); ++i) CHECK(got[h][i] == label[q[h][i]]);
    }
    CHECK(eng.report().violations == 0);
  }
}

TEST_CASE("resolve_labels: one hot target asked by every node") {
  const std::uint32_t n = 64;
  std::vector<NodeId> label(n + 1);
  for (NodeId v = 1; v <= n; ++v) label[v] = n + 1 - v;
  std::vector<std::vector<NodeId>> q(n + 1, std::vector<NodeId>(ceil_log2(n), 7));
  Engine eng(cfg_for(n));
  const auto got = resolve_labels(eng, q, label);
  for (NodeId h = 1; h <= n; ++h) {
    for (auto x : got[h]) CHECK(x == label[7]);
  }
}

TEST_CASE("any_node is a global OR") {
  Engine eng(cfg_for(16));
  std::vector<char> f(17, 0);
  CHECK_FALSE(any_node(eng, f));
  f[16] = 1;
  CHECK(any_node(eng, f));
}

TEST_CASE("spanning forest matches union-find components") {
  for (std::uint32_t n : {2U, 16U, 64U}) {
    for (const auto& g : sample_graphs(n, n)) {
      Engine eng(cfg_for(n, 3));
      const auto r = spanning_forest(eng, g);
      const auto want = components_oracle(g);
      CHECK(same_partition(r.label, want));
      std::set<NodeId> comps(want.begin() + 1, want.end());
      CHECK(r.forest.size() == n - comps.size());
      test::UnionFind uf(n);
      std::set<std::pair<NodeId, NodeId>> present;
      for (const auto& e : g.edges) present.emplace(std::min(e.u, e.v), std::max(e.u, e.v));
      for (const auto& e : r.forest) {
        CHECK(uf.unite(e.u, e.v));
        CHECK(present.count({e.u, e.v}) == 1);
      }
      CHECK(eng.report().violations == 0);
    }
  }
}

TEST_CASE("spanning forest: materialized sketches give the same run") {
  const auto g = gen_graph({"gnm", 32, 80, 0, 0, 0, 11});
  Engine a(cfg_for(32, 5));
  Engine b(cfg_for(32, 5));
  SfOptions o;
  o.materialize_nodes = true;
  const auto ra = spanning_forest(a, g);
  const auto rb = spanning_forest(b, g, o);
  CHECK(ra.forest == rb.forest);
  CHECK(ra.label == rb.label);
  CHECK(a.report() == b.report());
}

TEST_CASE("Boruvka on evenly held edges equals Kruskal") {
  for (std::uint32_t n : {2U, 16U, 64U}) {
    for (const auto& g : sample_graphs(n, 100 + n)) {
      Engine eng(cfg_for(n, 2));
      const auto r = boruvka_msf_even(eng, held_spread(g));
      CHECK(r.forest == kruskal_of(g));
      CHECK(audit_decomposition(r, n).empty());
      CHECK(same_partition(r.final_leader, components_oracle(g)));
      for (NodeId v = 1; v <= n; ++v) {
        for (const auto& e : r.known[v]) CHECK((e.u == v || e.v == v));
      }
    }
  }
}

TEST_CASE("Boruvka decomposition: every recorded MWOE is the lightest edge leaving its component") {
  const auto g = gen_graph({"gnm", 48, 150, 0, 0, 0, 9});
  Engine eng(cfg_for(48));
  const auto r = boruvka_msf_even(eng, held_spread(g));
  REQUIRE_FALSE(r.phases.empty());
  for (const auto& ph : r.phases) {
    std::map<NodeId, EdgeKey> best;
    for (const auto& e : g.edges) {
      const NodeId a = ph.leader[e.u];
      const NodeId b = ph.leader[e.v];
      if (a == b) continue;
      for (NodeId c : {a, b}) {
        auto it = best.find(c);
        if (it == best.end() || key_of(e) < it->second) best[c] = key_of(e);
      }
    }
    for (NodeId v = 1; v <= 48; ++v) {
      auto it = best.find(ph.leader[v]);
      if (it == best.end()) CHECK(ph.mwoe[v] == kNoKey);
      else CHECK(ph.mwoe[v] == it->second);
    }
  }
}

TEST_CASE("Boruvka refuses uneven inputs") {
  const auto g = gen_graph({"complete", 16, 0, 0, 0, 0, 1});
  Engine eng(cfg_for(16));
  BoruvkaOptions o;
  o.c_even = 1;
  CHECK_THROWS_AS(boruvka_msf_even(eng, held_at_min(g), o), UnevenDistribution);
}

TEST_CASE("sample_subgraph keeps both directions of an edge and the expected share") {
  const auto g = gen_graph({"complete", 128, 0, 0, 0, 0, 2});
  const auto adj = g.adjacency();
  const KWiseHash h(9 * ceil_log2(128), 77);
  CHECK(sample_subgraph(adj, h, 128, 1).size() == adj.size());
  for (NodeId v = 1; v <= 128; ++v) CHECK(sample_subgraph(adj, h, 128, 1)[v].size() == adj[v].size());
  const auto s = sample_subgraph(adj, h, 128, 7);
  std::set<std::pair<NodeId, NodeId>> dir;
  std::uint64_t kept = 0;
  for (NodeId v = 1; v <= 128; ++v) {
    for (const auto& x : s[v]) dir.emplace(v, x.to);
    kept += s[v].size();
  }
  for (const auto& [a, b] : dir) CHECK(dir.count({b, a}) == 1);
  const double share = static_cast<double>(kept / 2) / static_cast<double>(g.edges.size());
  CHECK(share == doctest::Approx(1.0 / 7).epsilon(0.15));
}

TEST_CASE("find_f_light contains every F-light edge") {
  const std::uint32_t n = 64;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto g = gen_graph({"gnm", n, 600, 0, 0, 0, seed});
    const auto adj = g.adjacency();
    const auto hadj = sample_subgraph(adj, KWiseHash(9 * ceil_log2(n), seed), n, ceil_log2(n));
    std::vector<std::vector<WeightedEdge>> held(n + 1);
    std::vector<WeightedEdge> h_edges;
    for (NodeId v = 1; v <= n; ++v) {
      for (const auto& x : hadj[v]) {
        if (v < x.to) {
          held[v].push_back({v, x.to, x.w});
          h_edges.push_back({v, x.to, x.w});
        }
      }
    }
    Engine eng(cfg_for(n, seed));
    const auto f = boruvka_msf_even(eng, held);
    const auto light = find_f_light(eng, f, adj);
    std::set<std::tuple<NodeId, NodeId, std::uint64_t>> got;
    for (const auto& hl : light.held) {
      for (const auto& e : hl) got.emplace(e.u, e.v, e.w);
    }
    auto with_f = got;
    for (const auto& e : f.forest) with_f.emplace(e.u, e.v, e.w);
    for (const auto& e : test::f_light(n, to_w(f.forest), to_w(g.edges))) {
      CHECK(with_f.count({std::min(e.u, e.v), std::max(e.u, e.v), e.w}) == 1);
    }
    // recovered edges are real edges of g
    std::set<std::tuple<NodeId, NodeId, std::uint64_t>> real;
    for (const auto& e : g.edges) real.emplace(e.u, e.v, e.w);
    for (const auto& t : got) CHECK(real.count(t) == 1);
    CHECK(light.phases == f.phases.size() + 1);
  }
}

TEST_CASE("load_balance keeps the multiset and evens the load") {
  const std::uint32_t n = 64;
  const std::uint32_t lg = ceil_log2(n);
  std::vector<std::vector<WeightedEdge>> held(n + 1);
  std::mt19937_64 rng(3);
  for (std::uint32_t i = 0; i < 8 * lg * lg; ++i) held[1].push_back({1, static_cast<NodeId>(2 + i % 60), i});
  for (NodeId v = 2; v <= n; ++v) {
    for (std::uint64_t i = rng() % (2 * lg); i > 0; --i) held[v].push_back({v, 1, 1000 * v + i});
  }
  Engine eng(cfg_for(n));
  const auto r = load_balance(eng, held);
  std::multiset<std::tuple<NodeId, NodeId, std::uint64_t>> before;
  std::multiset<std::tuple<NodeId, NodeId, std::uint64_t>> after;
  for (const auto& h : held) {
    for (const auto& e : h) before.emplace(e.u, e.v, e.w);
  }
  for (NodeId v = 1; v <= n; ++v) {
    CHECK(r.held[v].size() <= 33ULL * lg);
    for (const auto& e : r.held[v]) after.emplace(e.u, e.v, e.w);
  }
  CHECK(before == after);
  CHECK(eng.report().violations == 0);

  held[2].resize(32ULL * lg * lg + 1);
  Engine eng2(cfg_for(n));
  CHECK_THROWS_AS(load_balance(eng2, held), OverCapacity);
}

TEST_CASE("msf equals Kruskal and Prim across graph kinds") {
  for (std::uint32_t n : {2U, 16U, 64U}) {
    auto gs = sample_graphs(n, 7 * n);
    gs.push_back(gen_graph({"complete", n, 0, 0, 0, 0, n}));
    for (const auto& g : gs) {
      Engine eng(cfg_for(n, 4));
      const auto r = msf(eng, g);
      CHECK(r.forest == kruskal_of(g));
      CHECK(r.weight == prim_oracle(g).weight);
      CHECK(r.depth <= r.depth_bound);
      CHECK(eng.report().violations == 0);
    }
  }
}

TEST_CASE("msf on a dense graph samples at least one level and is deterministic") {
  const auto g = gen_graph({"complete", 128, 0, 0, 0, 0, 5});
  Engine a(cfg_for(128, 9));
  Engine b(cfg_for(128, 9));
  const auto ra = msf(a, g);
  const auto rb = msf(b, g);
  CHECK(ra.depth >= 1);
  CHECK(ra.forest == kruskal_of(g));
  CHECK(ra.forest == rb.forest);
  CHECK(a.report() == b.report());
  CHECK(ra.levels.size() == ra.depth + 1);
}
