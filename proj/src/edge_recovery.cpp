#include "ncc/edge_recovery.hpp"

#include <string>

#include "ncc/errors.hpp"
#include "ncc/rng.hpp"

namespace ncc {

std::uint64_t seed_from_words(const std::vector<std::uint64_t>& words) {
  std::uint64_t s = 0x6a09e667f3bcc909ULL;
  for (auto w : words) s = mix64(s ^ w);
  return s;
}

std::vector<LinearSketch> set_sketches(const CommForest* f, const Partition& p, const Adjacency& adj,
                                       const SketchParams& params, bool carry_weights, bool materialize) {
  const std::uint32_t n = p.n;
  auto updates_of = [&](NodeId v, std::vector<Update>& out) {
    if (carry_weights) {
      agm_weighted_updates(v, adj[v], n, out);
    } else {
      for (const auto& x : adj[v]) {
        const NodeId u = x.to;
        agm_updates(v, std::span<const NodeId>(&u, 1), n, out);
      }
    }
  };
  std::vector<LinearSketch> at_leader(n + 1);
  if (materialize) {
    if (f == nullptr) throw InvalidConfig("materialized sketches need the communication trees");
    std::vector<LinearSketch> per_node(n + 1);
    std::vector<Update> ups;
    for (NodeId v = 1; v <= n; ++v) {
      if (p.leader[v] == 0) continue;
      ups.clear();
      updates_of(v, ups);
      per_node[v] = LinearSketch::encode(params, ups);
    }
    auto add = [](const LinearSketch& a, const LinearSketch& b) { return a + b; };
    at_leader = detail::fold_up(*f, per_node, add);
    return at_leader;
  }
  std::vector<std::vector<Update>> ups(n + 1);
  for (NodeId v = 1; v <= n; ++v) {
    if (p.leader[v] != 0) updates_of(v, ups[p.leader[v]]);
  }
  for (NodeId l = 1; l <= n; ++l) {
    if (p.leader[l] == l) at_leader[l] = LinearSketch::encode(params, net_updates(std::move(ups[l])));
  }
  return at_leader;
}

KEdgeResult k_edge_recovery(Engine& eng, const Partition& p, const Adjacency& adj, std::uint32_t k,
                            const KEdgeOptions& opt, const CommForest* trees) {
  const std::uint32_t n = eng.n();
  if (p.n != n || p.factor != 1) throw InvalidConfig("edge recovery needs a partition of the real nodes");
  if (adj.size() != std::size_t{n} + 1) throw InvalidConfig("adjacency must be indexed by node id");
  p.validate();
  const std::uint64_t start = eng.rounds();

  KEdgeResult res;
  SketchParams params = ksparse_params(std::uint64_t{n} * n, k, 0, opt.c_s);
  res.seed_bits = params.seed_bits();
  const auto shared = broadcast_shared_randomness(eng, res.seed_bits, opt.sub_seed);
  params.seed = seed_from_words(shared[1]);

  CommForest own;
  if (trees == nullptr) {
    own = build_comm_trees(eng, p, max_tree_message_bits(n));
    trees = &own;
  }
  const CommForest& f = *trees;
  const auto at_leader = set_sketches(&f, p, adj, params, opt.carry_weights, opt.materialize_nodes);

  res.sketch_bits = LinearSketch(params).bits();
  const std::uint64_t c = f.c_bits;
  tree_sweep(eng, f, true, (res.sketch_bits + c - 1) / c, c);

  res.edges.assign(n + 1, {});
  res.dense.assign(n + 1, 0);
  for (NodeId l = 1; l <= n; ++l) {
    if (p.leader[l] != l) continue;
    auto d = ksparse_decode(at_leader[l], opt.c_dense);
    if (d.dense) {
      if (opt.throw_on_dense) {
        throw PromiseViolated("leader " + std::to_string(l) + " decoded DENSE with k = " + std::to_string(k));
      }
      res.dense[l] = 1;
      continue;
    }
    if (opt.carry_weights) {
      res.edges[l] = weighted_cut_edges(d.coords, n);
    } else {
      for (auto [u, v] : cut_edges(d.coords, n)) res.edges[l].push_back({u, v, 0});
    }
  }
  res.rounds = eng.rounds() - start;
  return res;
}

}  // namespace ncc
