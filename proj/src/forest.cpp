#include "ncc/forest.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>

#include "ncc/edge_recovery.hpp"
#include "ncc/errors.hpp"
#include "ncc/group_comm.hpp"
#include "ncc/primitives.hpp"
#include "ncc/range_tree.hpp"
#include "ncc/rng.hpp"
#include "ncc/sort.hpp"

namespace ncc {

namespace {

/// Point-to-point traffic summed per (src, dst) before scheduling.
class Traffic {
 public:
  void add(NodeId src, NodeId dst, std::uint64_t bits) { load_[{src, dst}] += bits; }
  void send(Engine& eng) {
    std::vector<Flow> flows;
    flows.reserve(load_.size());
    for (const auto& [ab, bits] : load_) flows.push_back({ab.first, ab.second, bits});
    eng.exchange(flows);
    load_.clear();
  }

 private:
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> load_;
};

std::vector<std::uint64_t> as_leaders(const std::vector<NodeId>& leader) {
  std::vector<std::uint64_t> out(leader.size() - 1);
  for (std::size_t v = 1; v < leader.size(); ++v) out[v - 1] = leader[v];
  return out;
}

std::vector<WeightedEdge> union_sorted(const std::vector<std::vector<WeightedEdge>>& known) {
  std::vector<WeightedEdge> all;
  for (const auto& k : known) all.insert(all.end(), k.begin(), k.end());
  all = canonical_edges(std::move(all));
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

/// Payload every member learns after a merge step.
struct MergeNews {
  NodeId leader = 0;
  WeightedEdge edge;
  bool has_edge = false;
  bool in_forest = false;
};

/// Contracts the components along the chosen edges. chosen[A] = (A, B, edge)
/// for leaders A that picked one. Returns the new leader of every node and
/// records forest edges at their inside endpoint.
std::vector<NodeId> contract(Engine& eng, const std::vector<NodeId>& leader,
                             const std::vector<std::optional<std::pair<NodeId, WeightedEdge>>>& chosen,
                             std::uint64_t seed, std::vector<std::vector<WeightedEdge>>& known) {
  const std::uint32_t n = eng.n();
  std::vector<std::vector<CcEdge>> held(n);
  for (NodeId a = 1; a <= n; ++a) {
    if (chosen[a]) held[a - 1].push_back({a, chosen[a]->first});
  }
  const CcResult cc = pram_connected_components(eng, held, seed);

  std::vector<MergeNews> news(std::size_t{n} + 1);
  for (NodeId a = 1; a <= n; ++a) {
    if (leader[a] != a) continue;
    news[a].leader = cc.label[a];
    if (chosen[a]) {
      news[a].edge = chosen[a]->second;
      news[a].has_edge = true;
      news[a].in_forest = cc.in_forest[a - 1][0] != 0;
    }
  }
  const Partition p = Partition::from_leaders(n, as_leaders(leader));
  const CommForest f = build_comm_trees(eng, p, max_tree_message_bits(n));
  const std::uint64_t bits = 3ULL * id_bits(n) + 64 + 2;
  const auto got = multicast(eng, f, news, bits);

  std::vector<NodeId> next(std::size_t{n} + 1, 0);
  for (NodeId v = 1; v <= n; ++v) {
    next[v] = got[v].leader;
    const auto& e = got[v].edge;
    if (got[v].has_edge && got[v].in_forest && (e.u == v || e.v == v)) known[v].push_back(normalized(e));
  }
  return next;
}

}  // namespace

std::uint64_t edge_bits(std::uint32_t n) { return 64 + 2ULL * id_bits(n); }

bool any_node(Engine& eng, const std::vector<char>& flags) {
  const std::uint32_t n = eng.n();
  const RangeForest tree = RangeForest::over_nodes(n, std::max<std::uint32_t>(2, eng.log_n()));
  std::vector<char> vals(n);
  for (NodeId v = 1; v <= n; ++v) vals[v - 1] = flags[v];
  auto total = tree.reduce(eng, vals, [](char a, char b) -> char { return (a | b) != 0 ? 1 : 0; },
                           [](char) { return std::uint64_t{1}; });
  tree.broadcast(eng, total, [](char) { return std::uint64_t{1}; });
  return total[0] != 0;
}

std::vector<std::vector<NodeId>> resolve_labels(Engine& eng, const std::vector<std::vector<NodeId>>& queries,
                                                const std::vector<NodeId>& label) {
  const std::uint32_t n = eng.n();
  if (queries.size() != std::size_t{n} + 1 || label.size() != std::size_t{n} + 1) {
    throw InvalidConfig("queries and labels must be indexed by node id");
  }
  struct Query {
    NodeId target;
    NodeId holder;
    std::uint32_t idx;
  };
  auto less = [](const Query& a, const Query& b) {
    return std::tie(a.target, a.holder, a.idx) < std::tie(b.target, b.holder, b.idx);
  };
  std::vector<std::vector<Query>> keys(n);
  std::uint64_t longest = 1;
  for (NodeId h = 1; h <= n; ++h) {
    longest = std::max<std::uint64_t>(longest, queries[h].size());
    for (std::uint32_t i = 0; i < queries[h].size(); ++i) {
      const NodeId t = queries[h][i];
      if (t < 1 || t > n) throw InvalidConfig("query target outside [1, n]");
      keys[h - 1].push_back({t, h, i});
    }
  }
  const std::uint32_t idb = id_bits(n);
  const std::uint64_t qbits = 2ULL * idb + id_bits(longest);
  const auto sorted = sort_distributed(eng, keys, less, qbits);

  // Targets strictly inside a slice occur in no other slice: ask directly.
  Traffic ask;
  Traffic answer;
  Partition p;
  p.n = n;
  p.factor = 3;
  p.leader.assign(3ULL * n + 1, 0);
  bool boundary = false;
  for (NodeId v = 1; v <= n; ++v) {
    const auto& sl = sorted.slices[v - 1];
    if (sl.empty()) continue;
    const NodeId xb = sl.front().target;
    const NodeId xe = sl.back().target;
    NodeId last = 0;
    for (const auto& q : sl) {
      if (q.target == xb || q.target == xe || q.target == last) continue;
      last = q.target;
      ask.add(v, q.target, idb);
      answer.add(q.target, v, idb);
    }
    boundary = true;
    p.leader[xb] = xb;
    p.leader[n + v] = xb;
    if (xe != xb) {
      p.leader[xe] = xe;
      p.leader[2ULL * n + v] = xe;
    }
  }
  ask.send(eng);
  answer.send(eng);
  // Targets on a slice boundary may span many nodes: the target multicasts.
  if (boundary) {
    const CommForest f = build_comm_trees(eng, p, std::min<std::uint64_t>(idb, max_tree_message_bits(n)));
    std::vector<NodeId> at_leader(p.leader.size(), 0);
    for (NodeId x = 1; x <= n; ++x) at_leader[x] = label[x];
    multicast(eng, f, at_leader, idb);
  }

  std::vector<std::vector<NodeId>> out(std::size_t{n} + 1);
  for (NodeId h = 1; h <= n; ++h) out[h].resize(queries[h].size());
  Traffic back;
  const std::uint64_t abits = idb + id_bits(longest);
  for (NodeId v = 1; v <= n; ++v) {
    for (const auto& q : sorted.slices[v - 1]) {
      out[q.holder][q.idx] = label[q.target];
      back.add(v, q.holder, abits);
    }
  }
  back.send(eng);
  return out;
}

SfResult spanning_forest(Engine& eng, const Graph& g, const SfOptions& opt) {
  const std::uint32_t n = eng.n();
  if (g.n != n) throw InvalidConfig("graph size does not match the engine");
  const std::uint64_t start = eng.rounds();
  const std::uint32_t lg = eng.log_n();
  const std::uint32_t max_phases = opt.max_phases != 0 ? opt.max_phases : 16 * lg + 16;
  const Adjacency adj = g.adjacency();

  SfResult res;
  res.known.assign(std::size_t{n} + 1, {});
  std::vector<NodeId> leader(std::size_t{n} + 1);
  std::iota(leader.begin(), leader.end(), 0);

  for (std::uint32_t phase = 0;; ++phase) {
    const Partition p = Partition::from_leaders(n, as_leaders(leader));
    const CommForest f = build_comm_trees(eng, p, max_tree_message_bits(n));
    SketchParams params = l0_params(std::uint64_t{n} * n, 0);
    const auto shared = broadcast_shared_randomness(eng, params.seed_bits(), derive_seed(opt.seed, 0x5f, phase));
    params.seed = seed_from_words(shared[1]);
    const auto sk = set_sketches(&f, p, adj, params, false, opt.materialize_nodes);
    const std::uint64_t c = f.c_bits;
    tree_sweep(eng, f, true, (LinearSketch(params).bits() + c - 1) / c, c);

    std::vector<char> alive(std::size_t{n} + 1, 0);
    for (NodeId a = 1; a <= n; ++a) alive[a] = leader[a] == a && !sk[a].is_zero();
    if (!any_node(eng, alive)) break;
    if (phase >= max_phases) {
      throw NonTermination("spanning forest still has outgoing edges after " + std::to_string(phase) + " phases");
    }
    ++res.phases;

    // Each live leader samples one cut coordinate; +1 at <j, k> puts j inside.
    std::vector<std::vector<NodeId>> queries(std::size_t{n} + 1);
    std::vector<std::pair<NodeId, NodeId>> pick(std::size_t{n} + 1, {0, 0});
    for (NodeId a = 1; a <= n; ++a) {
      if (!alive[a]) continue;
      const auto coord = l0_sample(sk[a]);
      if (!coord) {
        ++res.sampler_failures;
        continue;
      }
      auto [j, k] = agm_pair(coord->index, n);
      if (coord->value < 0) std::swap(j, k);
      pick[a] = {j, k};
      queries[a].push_back(k);
    }
    const auto outside = resolve_labels(eng, queries, leader);

    std::vector<std::optional<std::pair<NodeId, WeightedEdge>>> chosen(std::size_t{n} + 1);
    for (NodeId a = 1; a <= n; ++a) {
      if (queries[a].empty()) continue;
      const auto [j, k] = pick[a];
      std::uint64_t w = 0;
      for (const auto& x : adj[j]) {
        if (x.to == k) w = x.w;
      }
      chosen[a] = std::make_pair(outside[a][0], WeightedEdge{j, k, w});
    }
    leader = contract(eng, leader, chosen, derive_seed(opt.seed, 0xcc, phase), res.known);
  }
  res.forest = union_sorted(res.known);
  res.label = leader;
  res.rounds = eng.rounds() - start;
  return res;
}

BoruvkaResult boruvka_msf_even(Engine& eng, const std::vector<std::vector<WeightedEdge>>& held,
                               const BoruvkaOptions& opt) {
  const std::uint32_t n = eng.n();
  if (held.size() != std::size_t{n} + 1) throw InvalidConfig("held edges must be indexed by node id");
  const std::uint32_t lg = eng.log_n();
  const std::uint64_t limit = std::uint64_t{opt.c_even} * lg;
  for (NodeId v = 1; v <= n; ++v) {
    if (held[v].size() > limit) {
      throw UnevenDistribution("node " + std::to_string(v) + " holds " + std::to_string(held[v].size()) +
                               " edges > " + std::to_string(limit));
    }
  }
  const std::uint64_t start = eng.rounds();
  const std::uint32_t idb = id_bits(n);

  BoruvkaResult res;
  res.known.assign(std::size_t{n} + 1, {});
  std::vector<NodeId> leader(std::size_t{n} + 1);
  std::iota(leader.begin(), leader.end(), 0);

  struct Item {
    NodeId comp;
    EdgeKey key;
    NodeId other;
  };
  auto item_less = [](const Item& a, const Item& b) { return std::tie(a.comp, a.key) < std::tie(b.comp, b.key); };
  const std::uint64_t item_bits = 2ULL * idb + edge_bits(n);

  for (std::uint32_t phase = 0;; ++phase) {
    std::vector<std::vector<NodeId>> queries(std::size_t{n} + 1);
    for (NodeId v = 1; v <= n; ++v) {
      for (const auto& e : held[v]) {
        queries[v].push_back(e.u);
        queries[v].push_back(e.v);
      }
    }
    const auto labels = resolve_labels(eng, queries, leader);

    std::vector<std::vector<Item>> items(n);
    std::vector<char> crossing(std::size_t{n} + 1, 0);
    for (NodeId v = 1; v <= n; ++v) {
      for (std::size_t i = 0; i < held[v].size(); ++i) {
        const NodeId lu = labels[v][2 * i];
        const NodeId lv = labels[v][2 * i + 1];
        if (lu == lv) continue;
        const EdgeKey key = key_of(held[v][i]);
        items[v - 1].push_back({lu, key, lv});
        items[v - 1].push_back({lv, key, lu});
        crossing[v] = 1;
      }
    }
    if (!any_node(eng, crossing)) break;
    if (phase > 2 * lg + 4) throw NonTermination("Boruvka did not converge");

    const auto sorted = sort_distributed(eng, items, item_less, item_bits);
    // Run starts need the last component of the previous slice.
    Traffic edge_to_next;
    for (NodeId v = 1; v < n; ++v) {
      if (!sorted.slices[v].empty()) edge_to_next.add(v, v + 1, idb);
    }
    edge_to_next.send(eng);
    std::vector<std::optional<std::pair<NodeId, WeightedEdge>>> chosen(std::size_t{n} + 1);
    Traffic to_leader;
    for (NodeId v = 1; v <= n; ++v) {
      const auto& sl = sorted.slices[v - 1];
      for (std::size_t j = 0; j < sl.size(); ++j) {
        const NodeId prev = j > 0 ? sl[j - 1].comp : (v > 1 && !sorted.slices[v - 2].empty() ? sorted.slices[v - 2].back().comp : 0);
        if (prev == sl[j].comp) continue;
        const auto& it = sl[j];
        chosen[it.comp] = std::make_pair(it.other, WeightedEdge{it.key.lo, it.key.hi, it.key.w});
        to_leader.add(v, it.comp, item_bits);
      }
    }
    to_leader.send(eng);

    BoruvkaPhase rec;
    rec.leader = leader;
    rec.mwoe.assign(std::size_t{n} + 1, kNoKey);
    rec.mwoe_edge.assign(std::size_t{n} + 1, WeightedEdge{});
    for (NodeId v = 1; v <= n; ++v) {
      if (chosen[leader[v]]) {
        rec.mwoe_edge[v] = chosen[leader[v]]->second;
        rec.mwoe[v] = key_of(rec.mwoe_edge[v]);
      }
    }
    res.phases.push_back(std::move(rec));
    leader = contract(eng, leader, chosen, derive_seed(opt.seed, 0xb0, phase), res.known);
  }
  res.final_leader = leader;
  res.forest = union_sorted(res.known);
  res.rounds = eng.rounds() - start;
  return res;
}

std::string audit_decomposition(const BoruvkaResult& r, std::uint32_t n) {
  for (std::size_t i = 0; i < r.phases.size(); ++i) {
    const auto& ph = r.phases[i];
    const auto& next = i + 1 < r.phases.size() ? r.phases[i + 1].leader : r.final_leader;
    std::vector<NodeId> parent(std::size_t{n} + 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](NodeId x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (NodeId v = 1; v <= n; ++v) {
      parent[find(v)] = find(ph.leader[v]);
      if (ph.mwoe[v] == kNoKey) continue;
      const auto& e = ph.mwoe_edge[v];
      if (e.u != v && e.v != v) continue;
      parent[find(e.u)] = find(e.v);
    }
    std::map<NodeId, NodeId> seen;
    for (NodeId v = 1; v <= n; ++v) {
      const auto [it, fresh] = seen.emplace(find(v), next[v]);
      if (!fresh && it->second != next[v]) {
        return "phase " + std::to_string(i) + ": node " + std::to_string(v) + " split from its merged component";
      }
    }
    std::map<NodeId, NodeId> back;
    for (const auto& [root, lead] : seen) {
      if (!back.emplace(lead, root).second) {
        return "phase " + std::to_string(i) + ": leader " + std::to_string(lead) + " spans two merged components";
      }
    }
  }
  return {};
}

}  // namespace ncc
