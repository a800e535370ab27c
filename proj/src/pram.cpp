#include <algorithm>

#include "ncc/errors.hpp"
#include "ncc/primitives.hpp"
#include "ncc/range_tree.hpp"
#include "ncc/rng.hpp"

namespace ncc {

namespace {

constexpr NodeId kNone = 0;

struct Proposal {
  NodeId target;
  std::uint32_t holder;
  std::uint32_t idx;
};

bool global_or(Engine& eng, const RangeForest& tree, const std::vector<char>& flags) {
  auto total = tree.reduce(eng, flags, [](char a, char b) -> char { return (a | b) != 0 ? 1 : 0; },
                           [](char) { return std::uint64_t{1}; });
  tree.broadcast(eng, total, [](char) { return std::uint64_t{1}; });
  return total[0] != 0;
}

}  // namespace

CcResult pram_connected_components(Engine& eng, const std::vector<std::vector<CcEdge>>& held,
                                   std::uint64_t seed) {
  const std::uint32_t n = eng.n();
  if (held.size() != n) throw InvalidConfig("one edge list per node expected");
  const std::uint32_t idb = id_bits(n);
  const RangeForest tree = RangeForest::over_nodes(n, std::max<std::uint32_t>(2, eng.log_n()));

  CcResult res;
  res.edge_label.resize(n);
  res.in_forest.resize(n);
  std::vector<std::vector<NodeId>> lu(n);
  std::vector<std::vector<NodeId>> lv(n);
  for (NodeId h = 1; h <= n; ++h) {
    for (const auto& e : held[h - 1]) {
      if (e.u < 1 || e.u > n || e.v < 1 || e.v > n) throw InvalidConfig("edge endpoint out of range");
    }
    lu[h - 1].reserve(held[h - 1].size());
    for (const auto& e : held[h - 1]) {
      lu[h - 1].push_back(e.u);
      lv[h - 1].push_back(e.v);
    }
    res.in_forest[h - 1].assign(held[h - 1].size(), 0);
  }

  std::vector<NodeId> parent(n + 1, kNone);
  std::vector<std::uint32_t> hooked_at(n + 1, 0);
  std::vector<Proposal> best(n + 1);
  std::vector<Flow> flows;
  std::vector<char> alive_flag(n, 0);
  std::vector<NodeId> seen;

  std::uint32_t it = 0;
  for (;; ++it) {
    for (NodeId h = 1; h <= n; ++h) {
      alive_flag[h - 1] = 0;
      for (std::size_t k = 0; k < lu[h - 1].size(); ++k) {
        if (lu[h - 1][k] != lv[h - 1][k]) {
          alive_flag[h - 1] = 1;
          break;
        }
      }
    }
    if (!global_or(eng, tree, alive_flag)) break;

    const std::uint64_t it_seed = derive_seed(seed, it);
    auto head = [&](NodeId r) { return (mix64(it_seed ^ r) & 1U) != 0; };

    // Tails propose to hook under a head neighbour; the lowest label wins.
    std::fill(best.begin(), best.end(), Proposal{kNone, 0, 0});
    flows.clear();
    for (NodeId h = 1; h <= n; ++h) {
      for (std::uint32_t k = 0; k < lu[h - 1].size(); ++k) {
        const NodeId a = lu[h - 1][k];
        const NodeId b = lv[h - 1][k];
        if (a == b) continue;
        NodeId tail = kNone;
        NodeId target = kNone;
        if (!head(a) && head(b)) {
          tail = a;
          target = b;
        } else if (head(a) && !head(b)) {
          tail = b;
          target = a;
        } else {
          continue;
        }
        flows.push_back({h, tail, 2ULL * idb});
        auto& cur = best[tail];
        if (cur.target == kNone || target < cur.target) cur = Proposal{target, h, k};
      }
    }
    eng.exchange(flows);

    flows.clear();
    for (NodeId r = 1; r <= n; ++r) {
      if (best[r].target == kNone) continue;
      parent[r] = best[r].target;
      hooked_at[r] = it + 1;
      res.in_forest[best[r].holder - 1][best[r].idx] = 1;
      flows.push_back({r, best[r].holder, 1});
    }
    eng.exchange(flows);

    // Holders refresh the labels of live edges: request, then response.
    flows.clear();
    std::vector<Flow> back;
    for (NodeId h = 1; h <= n; ++h) {
      seen.clear();
      for (std::size_t k = 0; k < lu[h - 1].size(); ++k) {
        if (lu[h - 1][k] == lv[h - 1][k]) continue;
        seen.push_back(lu[h - 1][k]);
        seen.push_back(lv[h - 1][k]);
      }
      std::sort(seen.begin(), seen.end());
      seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
      for (NodeId x : seen) {
        flows.push_back({h, x, idb});
        back.push_back({x, h, idb});
      }
      for (std::size_t k = 0; k < lu[h - 1].size(); ++k) {
        if (lu[h - 1][k] == lv[h - 1][k]) continue;
        auto relabel = [&](NodeId x) { return hooked_at[x] == it + 1 ? parent[x] : x; };
        lu[h - 1][k] = relabel(lu[h - 1][k]);
        lv[h - 1][k] = relabel(lv[h - 1][k]);
      }
    }
    eng.exchange(flows);
    eng.exchange(back);
  }
  res.iterations = it;

  // Unwind the hook forest, latest hooks first.
  res.label.assign(n + 1, kNone);
  for (NodeId x = 1; x <= n; ++x) res.label[x] = x;
  std::vector<std::vector<NodeId>> by_iter(it + 1);
  for (NodeId x = 1; x <= n; ++x) {
    if (hooked_at[x] != 0) by_iter[hooked_at[x] - 1].push_back(x);
  }
  for (std::uint32_t t = it; t-- > 0;) {
    if (by_iter[t].empty()) continue;
    flows.clear();
    std::vector<Flow> back;
    for (NodeId x : by_iter[t]) {
      res.label[x] = res.label[parent[x]];
      flows.push_back({x, parent[x], idb});
      back.push_back({parent[x], x, idb});
    }
    eng.exchange(flows);
    eng.exchange(back);
  }

  flows.clear();
  std::vector<Flow> back;
  for (NodeId h = 1; h <= n; ++h) {
    seen.clear();
    res.edge_label[h - 1].reserve(lu[h - 1].size());
    for (NodeId r : lu[h - 1]) {
      seen.push_back(r);
      res.edge_label[h - 1].push_back(res.label[r]);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (NodeId x : seen) {
      flows.push_back({h, x, idb});
      back.push_back({x, h, idb});
    }
  }
  eng.exchange(flows);
  eng.exchange(back);
  return res;
}

std::vector<std::vector<CcEdge>> pram_spanning_forest(Engine& eng,
                                                      const std::vector<std::vector<CcEdge>>& held,
                                                      std::uint64_t seed) {
  const auto cc = pram_connected_components(eng, held, seed);
  std::vector<std::vector<CcEdge>> out(held.size());
  for (std::size_t h = 0; h < held.size(); ++h) {
    for (std::size_t k = 0; k < held[h].size(); ++k) {
      if (cc.in_forest[h][k]) out[h].push_back(held[h][k]);
    }
  }
  return out;
}

}  // namespace ncc
