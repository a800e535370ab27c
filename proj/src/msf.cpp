#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "ncc/edge_recovery.hpp"
#include "ncc/errors.hpp"
#include "ncc/field.hpp"
#include "ncc/forest.hpp"
#include "ncc/group_comm.hpp"
#include "ncc/range_tree.hpp"
#include "ncc/rng.hpp"

namespace ncc {

namespace {

std::vector<WeightedEdge> dedup(std::vector<WeightedEdge> edges) {
  edges = canonical_edges(std::move(edges));
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

struct GraphStats {
  std::uint64_t edges = 0;
  std::uint32_t max_degree = 0;
};

/// Edge count and max degree, known to every node.
GraphStats global_stats(Engine& eng, const Adjacency& adj) {
  const std::uint32_t n = eng.n();
  const RangeForest tree = RangeForest::over_nodes(n, std::max<std::uint32_t>(2, eng.log_n()));
  std::vector<GraphStats> vals(n);
  for (NodeId v = 1; v <= n; ++v) {
    vals[v - 1].edges = adj[v].size();
    vals[v - 1].max_degree = static_cast<std::uint32_t>(adj[v].size());
  }
  const std::uint64_t bits = 2ULL * id_bits(std::uint64_t{n} * n);
  auto total = tree.reduce(
      eng, vals,
      [](const GraphStats& a, const GraphStats& b) {
        return GraphStats{a.edges + b.edges, std::max(a.max_degree, b.max_degree)};
      },
      [&](const GraphStats&) { return bits; });
  tree.broadcast(eng, total, [&](const GraphStats&) { return bits; });
  total[0].edges /= 2;
  return total[0];
}

}  // namespace

std::uint64_t FLightResult::distinct() const {
  std::vector<WeightedEdge> all;
  for (const auto& h : held) all.insert(all.end(), h.begin(), h.end());
  return dedup(std::move(all)).size();
}

Adjacency sample_subgraph(const Adjacency& adj, const KWiseHash& h, std::uint32_t n, std::uint64_t p_den) {
  if (p_den < 1) throw InvalidParams("sampling needs p_den >= 1");
  const std::uint64_t cut = field::kPrime / p_den;
  Adjacency out(adj.size());
  for (NodeId v = 1; v < adj.size(); ++v) {
    for (const auto& x : adj[v]) {
      const auto [lo, hi] = std::minmax(v, x.to);
      if (p_den == 1 || h.field(agm_index(lo, hi, n)) < cut) out[v].push_back(x);
    }
  }
  return out;
}

FLightResult find_f_light(Engine& eng, const BoruvkaResult& d, const Adjacency& g, const FLightOptions& opt) {
  const std::uint32_t n = eng.n();
  if (g.size() != std::size_t{n} + 1) throw InvalidConfig("adjacency must be indexed by node id");
  const std::uint64_t start = eng.rounds();
  const std::uint32_t k0 = opt.k != 0 ? opt.k : 24 * eng.log_n();

  FLightResult res;
  res.held.assign(std::size_t{n} + 1, {});
  const std::size_t phases = d.phases.size() + 1;
  res.phases = static_cast<std::uint32_t>(phases);
  for (std::size_t i = 0; i < phases; ++i) {
    const bool closing = i == d.phases.size();
    const auto& leader = closing ? d.final_leader : d.phases[i].leader;
    // Node v offers the edges lighter than the MWOE of its component.
    Adjacency offered(std::size_t{n} + 1);
    for (NodeId v = 1; v <= n; ++v) {
      const EdgeKey bound = closing ? kInfiniteKey : d.phases[i].mwoe[v];
      if (bound == kNoKey) continue;
      for (const auto& x : g[v]) {
        if (tie_break(x.w, v, x.to) < bound) offered[v].push_back(x);
      }
    }
    std::vector<std::uint64_t> take(n);
    for (NodeId v = 1; v <= n; ++v) take[v - 1] = leader[v];
    std::uint32_t k = k0;
    for (std::uint32_t attempt = 0;; ++attempt) {
      const Partition p = Partition::from_leaders(n, take);
      KEdgeOptions ko;
      ko.sub_seed = derive_seed(opt.sub_seed, i, attempt);
      ko.materialize_nodes = opt.materialize_nodes;
      ko.throw_on_dense = false;
      ko.carry_weights = true;
      const KEdgeResult kr = k_edge_recovery(eng, p, offered, k, ko);
      for (NodeId a = 1; a <= n; ++a) {
        if (p.leader[a] != a || kr.dense[a]) continue;
        res.set_sizes.push_back(kr.edges[a].size());
        auto& mine = res.held[a];
        mine.insert(mine.end(), kr.edges[a].begin(), kr.edges[a].end());
        mine = dedup(std::move(mine));
      }
      std::vector<char> flag(std::size_t{n} + 1, 0);
      for (NodeId a = 1; a <= n; ++a) flag[a] = kr.dense[a];
      if (!any_node(eng, flag)) break;
      if (attempt >= opt.max_retries) {
        throw RetryExhausted("light edge recovery still DENSE after " + std::to_string(attempt) + " retries");
      }
      // Only the sets that came back DENSE go again, with twice the room.
      ++res.retries;
      for (NodeId v = 1; v <= n; ++v) {
        if (take[v - 1] != 0 && !kr.dense[take[v - 1]]) take[v - 1] = 0;
      }
      k *= 2;
    }
  }
  res.rounds = eng.rounds() - start;
  return res;
}

LoadBalanceResult load_balance(Engine& eng, const std::vector<std::vector<WeightedEdge>>& held,
                               const LoadBalanceOptions& opt) {
  const std::uint32_t n = eng.n();
  if (held.size() != std::size_t{n} + 1) throw InvalidConfig("held edges must be indexed by node id");
  const std::uint64_t lg = eng.log_n();
  const std::uint64_t per_node = opt.c_cap * lg * lg;
  const std::uint64_t overall = std::uint64_t{opt.c_cap} * n * lg;
  std::uint64_t total = 0;
  for (NodeId v = 1; v <= n; ++v) {
    if (held[v].size() > per_node) {
      throw OverCapacity("node " + std::to_string(v) + " holds " + std::to_string(held[v].size()) + " edges > " +
                         std::to_string(per_node));
    }
    total += held[v].size();
  }
  if (total > overall) throw OverCapacity(std::to_string(total) + " edges > " + std::to_string(overall));
  const std::uint64_t start = eng.rounds();

  // ceil(k_v / log n) helpers per node, numbered consecutively.
  std::vector<std::uint64_t> helpers(n);
  for (NodeId v = 1; v <= n; ++v) helpers[v - 1] = (held[v].size() + lg - 1) / lg;
  const RangeForest tree = RangeForest::over_nodes(n, std::max<std::uint32_t>(2, eng.log_n()));
  const auto offset = tree.exclusive_scan(
      eng, helpers, std::uint64_t{0}, [](std::uint64_t a, std::uint64_t b) { return a + b; },
      [&](std::uint64_t) { return std::uint64_t{id_bits(overall + n)}; });

  LoadBalanceResult res;
  res.held.assign(std::size_t{n} + 1, {});
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> load;
  const std::uint64_t eb = edge_bits(n);
  for (NodeId v = 1; v <= n; ++v) {
    const auto& mine = held[v];
    for (std::uint64_t j = 0; j < helpers[v - 1]; ++j) {
      const NodeId host = host_of(offset[v - 1] + j + 1, n);
      const std::size_t lo = j * lg;
      const std::size_t hi = std::min<std::size_t>(mine.size(), lo + lg);
      res.held[host].insert(res.held[host].end(), mine.begin() + static_cast<std::ptrdiff_t>(lo),
                            mine.begin() + static_cast<std::ptrdiff_t>(hi));
      load[{v, host}] += (hi - lo) * eb;
    }
    res.helpers += helpers[v - 1];
  }
  std::vector<Flow> flows;
  for (const auto& [ab, bits] : load) flows.push_back({ab.first, ab.second, bits});
  eng.exchange(flows);
  res.rounds = eng.rounds() - start;
  return res;
}

MsfResult msf(Engine& eng, const Graph& g, const MsfOptions& opt) {
  const std::uint32_t n = eng.n();
  if (g.n != n) throw InvalidConfig("graph size does not match the engine");
  const std::uint64_t start = eng.rounds();
  const std::uint32_t lg = eng.log_n();
  const std::uint32_t k_ind = opt.k_ind != 0 ? opt.k_ind : 9 * lg;
  const std::uint64_t p_den = opt.p_den != 0 ? opt.p_den : lg;
  const std::uint32_t delta = std::max<std::uint32_t>(2, g.max_degree());
  const double loglog = std::max(1.0, std::log2(std::log2(static_cast<double>(std::max<std::uint32_t>(n, 4)))));
  const auto ratio = static_cast<std::uint32_t>(std::ceil(std::log2(static_cast<double>(delta)) / loglog));

  MsfResult res;
  res.depth_bound = ratio + 1;
  const std::uint32_t max_levels = 2 * ratio + 2;

  // One hash per sampling level, all drawn up front.
  const std::uint64_t words_per_level = k_ind;
  const auto shared =
      broadcast_shared_randomness(eng, std::uint64_t{max_levels} * words_per_level * 64, derive_seed(opt.seed, 0x5a));
  const auto& words = shared[1];
  auto level_hash = [&](std::uint32_t lvl) {
    std::vector<std::uint64_t> coeffs(k_ind);
    for (std::uint32_t j = 0; j < k_ind; ++j) coeffs[j] = field::reduce(words[lvl * words_per_level + j]);
    return KWiseHash(std::move(coeffs));
  };

  std::vector<Adjacency> graphs{g.adjacency()};
  std::vector<GraphStats> stats;
  while (true) {
    stats.push_back(global_stats(eng, graphs.back()));
    const auto& s = stats.back();
    const bool small = s.edges <= std::uint64_t{n} * lg && s.max_degree <= std::uint64_t{opt.c_cap} * lg * lg;
    if (small || graphs.size() > max_levels) break;
    graphs.push_back(sample_subgraph(graphs.back(), level_hash(static_cast<std::uint32_t>(graphs.size() - 1)), n, p_den));
  }
  res.depth = static_cast<std::uint32_t>(graphs.size() - 1);

  LoadBalanceOptions lb;
  lb.c_cap = opt.c_cap;
  BoruvkaOptions bo;
  bo.c_even = opt.c_cap + 1;

  // Base: each edge of the sparsest graph starts at its smaller endpoint.
  std::uint64_t mark = eng.rounds();
  std::vector<std::vector<WeightedEdge>> held(std::size_t{n} + 1);
  for (NodeId v = 1; v <= n; ++v) {
    for (const auto& x : graphs.back()[v]) {
      if (v < x.to) held[v].push_back({v, x.to, x.w});
    }
  }
  bo.seed = derive_seed(opt.seed, 0xba, res.depth);
  BoruvkaResult cur = boruvka_msf_even(eng, load_balance(eng, held, lb).held, bo);
  res.levels.push_back({res.depth, stats.back().edges, stats.back().max_degree, 0, 0,
                        static_cast<std::uint32_t>(cur.phases.size()), eng.rounds() - mark});

  for (std::uint32_t lvl = res.depth; lvl-- > 0;) {
    mark = eng.rounds();
    FLightOptions fo = opt.light;
    fo.sub_seed = derive_seed(opt.seed, 0xf1, lvl);
    const FLightResult light = find_f_light(eng, cur, graphs[lvl], fo);
    res.light_set_sizes.insert(res.light_set_sizes.end(), light.set_sizes.begin(), light.set_sizes.end());
    for (NodeId v = 1; v <= n; ++v) {
      held[v] = cur.known[v];
      held[v].insert(held[v].end(), light.held[v].begin(), light.held[v].end());
      held[v] = dedup(std::move(held[v]));
    }
    bo.seed = derive_seed(opt.seed, 0xba, lvl);
    cur = boruvka_msf_even(eng, load_balance(eng, held, lb).held, bo);
    res.levels.push_back({lvl, stats[lvl].edges, stats[lvl].max_degree, light.distinct(), light.retries,
                          static_cast<std::uint32_t>(cur.phases.size()), eng.rounds() - mark});
  }

  res.known = cur.known;
  res.forest = cur.forest;
  for (const auto& e : res.forest) res.weight += e.w;
  res.rounds = eng.rounds() - start;
  return res;
}

}  // namespace ncc
