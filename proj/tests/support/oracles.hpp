#pragma once

// Sequential reference implementations used only by tests.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <tuple>
#include <vector>

#include "ncc/primitives.hpp"

namespace test {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : p_(n + 1), comps_(n) { std::iota(p_.begin(), p_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (p_[x] != x) x = p_[x] = p_[p_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p_[std::max(a, b)] = std::min(a, b);
    --comps_;
    return true;
  }
  std::size_t components() const { return comps_; }

 private:
  std::vector<std::size_t> p_;
  std::size_t comps_;
};

/// Direct delivery ignoring budgets; compares per-destination multisets.
inline bool same_deliveries(const std::vector<ncc::Packet>& sent,
                            const std::vector<std::vector<ncc::Packet>>& got) {
  std::map<ncc::NodeId, std::vector<std::tuple<ncc::NodeId, std::vector<std::uint64_t>>>> want;
  for (const auto& p : sent) want[p.dst].emplace_back(p.src, p.words);
  for (ncc::NodeId d = 1; d < got.size(); ++d) {
    std::vector<std::tuple<ncc::NodeId, std::vector<std::uint64_t>>> have;
    for (const auto& p : got[d]) {
      if (p.dst != d) return false;
      have.emplace_back(p.src, p.words);
    }
    auto w = want[d];
    std::sort(w.begin(), w.end());
    std::sort(have.begin(), have.end());
    if (w != have) return false;
  }
  return true;
}

struct WEdge {
  std::uint32_t u;
  std::uint32_t v;
  std::uint64_t w;
};

inline std::tuple<std::uint64_t, std::uint32_t, std::uint32_t> key_of(const WEdge& e) {
  return {e.w, std::min(e.u, e.v), std::max(e.u, e.v)};
}

/// Kruskal under the (w, min id, max id) order.
inline std::vector<WEdge> kruskal(std::uint32_t n, std::vector<WEdge> edges) {
  std::sort(edges.begin(), edges.end(), [](const WEdge& a, const WEdge& b) { return key_of(a) < key_of(b); });
  UnionFind uf(n);
  std::vector<WEdge> out;
  for (const auto& e : edges) {
    if (uf.unite(e.u, e.v)) out.push_back(e);
  }
  return out;
}

/// Edges of g that are F-light: endpoints in different trees of F, or key no
/// larger than the heaviest key on their F-path.
inline std::vector<WEdge> f_light(std::uint32_t n, const std::vector<WEdge>& forest, const std::vector<WEdge>& g) {
  std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> adj(n + 1);
  for (std::size_t i = 0; i < forest.size(); ++i) {
    adj[forest[i].u].emplace_back(forest[i].v, i);
    adj[forest[i].v].emplace_back(forest[i].u, i);
  }
  using Key = std::tuple<std::uint64_t, std::uint32_t, std::uint32_t>;
  // heaviest[s][t]: max key on the path, found by one traversal per source
  std::vector<std::vector<Key>> heaviest(n + 1, std::vector<Key>(n + 1));
  std::vector<std::vector<char>> reach(n + 1, std::vector<char>(n + 1, 0));
  for (std::uint32_t s = 1; s <= n; ++s) {
    std::vector<std::uint32_t> stack{s};
    reach[s][s] = 1;
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      for (auto [y, i] : adj[x]) {
        if (reach[s][y]) continue;
        reach[s][y] = 1;
        heaviest[s][y] = std::max(heaviest[s][x], key_of(forest[i]));
        stack.push_back(y);
      }
    }
  }
  std::vector<WEdge> out;
  for (const auto& e : g) {
    if (!reach[e.u][e.v] || key_of(e) <= heaviest[e.u][e.v]) out.push_back(e);
  }
  return out;
}

}  // namespace test
