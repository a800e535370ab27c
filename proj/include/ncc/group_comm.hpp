#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ncc/engine.hpp"
#include "ncc/errors.hpp"

namespace ncc {

/// Disjoint sets of participants, each identified by its leader. Participants
/// are ids in [1, factor * n]; id p is hosted by host_of(p, n).
struct Partition {
  std::uint32_t n = 0;
  std::uint32_t factor = 1;
  std::vector<std::uint64_t> leader;  // index = participant id; 0 = not taking part

  static Partition single_set(std::uint32_t n, std::uint64_t leader = 1);
  static Partition singletons(std::uint32_t n);
  /// Real nodes only: leaders[v - 1] is the leader of node v (0 = absent).
  static Partition from_leaders(std::uint32_t n, const std::vector<std::uint64_t>& leaders);

  std::uint64_t universe() const noexcept { return std::uint64_t{factor} * n; }
  void validate() const;
};

/// Per-set trees: the leader is the root, every participant is one leaf and
/// the inner nodes are virtual ids above factor * n, never shared by sets.
struct CommForest {
  std::uint32_t n = 0;
  std::uint32_t factor = 1;
  std::uint32_t fanout = 2;
  std::uint64_t c_bits = 0;
  std::uint32_t max_depth = 0;

  std::vector<std::uint64_t> leader;       // per participant
  std::vector<std::uint64_t> leaf_parent;  // per participant; == leader means the root
  std::vector<std::uint32_t> set_depth;    // per participant, meaningful at leaders

  struct Inner {
    std::uint64_t id = 0;
    std::uint64_t leader = 0;
    std::uint64_t parent = 0;  // inner id, or the leader for the root
    std::uint32_t level = 0;
    std::vector<std::uint64_t> children;  // participant ids at level 1, inner ids above
  };
  std::vector<Inner> inner;                              // ids first_inner() + k
  std::vector<std::vector<std::uint64_t>> root_children;  // per participant, filled at leaders

  std::uint64_t first_inner() const noexcept { return std::uint64_t{factor} * n + 1; }
  bool is_inner(std::uint64_t id) const noexcept { return id >= first_inner(); }
  const Inner& inner_at(std::uint64_t id) const { return inner[id - first_inner()]; }
  NodeId host(std::uint64_t id) const noexcept { return host_of(id, n); }

  /// Structural check of every tree against the partition; empty when sound.
  std::string audit(const Partition& p) const;
};

/// d = max(2, floor(log^2 n / max(c, 1))).
std::uint32_t comm_fanout(std::uint32_t n, std::uint64_t c_bits);
/// Largest message size the trees support: ceil(log2 n)^2 / 2, at least 1.
std::uint64_t max_tree_message_bits(std::uint32_t n);

CommForest build_comm_trees(Engine& eng, const Partition& p, std::uint64_t c_bits);

/// Accounts a pipelined sweep of `chunks` messages of `chunk_bits` bits
/// through every tree, downward from roots or upward to them.
std::uint64_t tree_sweep(Engine& eng, const CommForest& f, bool upward, std::uint64_t chunks,
                         std::uint64_t chunk_bits);

namespace detail {

template <class F>
void for_each_down(const CommForest& f, F&& visit) {
  // Inner nodes with higher levels first, then leaves.
  std::vector<std::size_t> order(f.inner.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return f.inner[a].level > f.inner[b].level; });
  for (std::size_t i : order) visit(f.inner[i].id, f.inner[i].parent);
  for (std::uint64_t p = 1; p < f.leader.size(); ++p) {
    if (f.leader[p] != 0) visit(p, f.leaf_parent[p]);
  }
}

}  // namespace detail

/// Every member of a set receives the value its leader holds in at_leader.
/// Payloads wider than the tree message size are sent in pipelined chunks.
template <class T>
std::vector<T> multicast(Engine& eng, const CommForest& f, const std::vector<T>& at_leader,
                         std::uint64_t bits) {
  std::vector<T> leaf(f.leader.size());
  std::vector<T> mid(f.inner.size());
  auto value_of = [&](std::uint64_t id, bool root) -> const T& {
    if (root) return at_leader[id];
    return mid[id - f.first_inner()];
  };
  detail::for_each_down(f, [&](std::uint64_t id, std::uint64_t parent) {
    const bool parent_is_root = !f.is_inner(parent);
    T v = value_of(parent, parent_is_root);
    if (f.is_inner(id)) mid[id - f.first_inner()] = std::move(v);
    else leaf[id] = std::move(v);
  });
  for (std::uint64_t p = 1; p < f.leader.size(); ++p) {
    if (f.leader[p] == p) leaf[p] = at_leader[p];
  }
  // wider payloads travel as ceil(bits / c) pipelined chunks
  const std::uint64_t c = std::max<std::uint64_t>(f.c_bits, 1);
  tree_sweep(eng, f, false, (bits + c - 1) / c, std::min(bits, c));
  tree_sweep(eng, f, true, 1, 1);
  return leaf;
}

/// x messages per leader, pipelined over consecutive tree levels.
template <class T>
std::vector<std::vector<T>> multicast_pipelined(Engine& eng, const CommForest& f,
                                                const std::vector<std::vector<T>>& at_leader,
                                                std::uint64_t bits_each) {
  if (bits_each > f.c_bits) {
    throw MessageSizeTooLarge(std::to_string(bits_each) + " bits > tree message size " + std::to_string(f.c_bits));
  }
  std::uint64_t x = 1;
  for (std::uint64_t p = 1; p < f.leader.size(); ++p) {
    if (f.leader[p] == p) x = std::max<std::uint64_t>(x, at_leader[p].size());
  }
  std::vector<std::vector<T>> leaf(f.leader.size());
  std::vector<const std::vector<T>*> mid(f.inner.size(), nullptr);
  detail::for_each_down(f, [&](std::uint64_t id, std::uint64_t parent) {
    const std::vector<T>* src = f.is_inner(parent) ? mid[parent - f.first_inner()] : &at_leader[parent];
    if (f.is_inner(id)) mid[id - f.first_inner()] = src;
    else leaf[id] = *src;
  });
  for (std::uint64_t p = 1; p < f.leader.size(); ++p) {
    if (f.leader[p] == p) leaf[p] = at_leader[p];
  }
  tree_sweep(eng, f, false, x, bits_each);
  tree_sweep(eng, f, true, 1, 1);
  return leaf;
}

namespace detail {

template <class T, class G>
std::vector<T> fold_up(const CommForest& f, const std::vector<T>& inputs, G& combine) {
  std::vector<T> mid(f.inner.size());
  std::vector<std::size_t> order(f.inner.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return f.inner[a].level < f.inner[b].level; });
  auto child_value = [&](std::uint64_t c) -> const T& {
    return f.is_inner(c) ? mid[c - f.first_inner()] : inputs[c];
  };
  for (std::size_t i : order) {
    const auto& nd = f.inner[i];
    T acc = child_value(nd.children.front());
    for (std::size_t j = 1; j < nd.children.size(); ++j) acc = combine(acc, child_value(nd.children[j]));
    mid[i] = std::move(acc);
  }
  std::vector<T> out(f.leader.size());
  for (std::uint64_t p = 1; p < f.leader.size(); ++p) {
    if (f.leader[p] != p) continue;
    const auto& ch = f.root_children[p];
    if (ch.empty()) {
      out[p] = inputs[p];
      continue;
    }
    T acc = child_value(ch.front());
    for (std::size_t j = 1; j < ch.size(); ++j) acc = combine(acc, child_value(ch[j]));
    out[p] = std::move(acc);
  }
  return out;
}

}  // namespace detail

/// Leader of each set ends with the ordered fold of its members' inputs.
/// Result is indexed by participant id and meaningful at leaders.
template <class T, class G>
std::vector<T> aggregate(Engine& eng, const CommForest& f, const std::vector<T>& inputs, G combine,
                         std::uint64_t bits) {
  if (bits > f.c_bits) {
    throw ValueTooWide(std::to_string(bits) + " bits > tree message size " + std::to_string(f.c_bits));
  }
  auto out = detail::fold_up(f, inputs, combine);
  tree_sweep(eng, f, true, 1, bits);
  return out;
}

/// x independent aggregations (or x slices of one wide value) in one
/// pipelined sweep. inputs[p] holds the x slices of participant p.
template <class S, class G>
std::vector<std::vector<S>> aggregate_pipelined(Engine& eng, const CommForest& f,
                                                const std::vector<std::vector<S>>& inputs, G combine,
                                                std::uint64_t slice_bits) {
  if (slice_bits > f.c_bits) {
    throw ValueTooWide(std::to_string(slice_bits) + " bits > tree message size " + std::to_string(f.c_bits));
  }
  auto slice_combine = [&](const std::vector<S>& a, const std::vector<S>& b) {
    std::vector<S> r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = combine(a[j], b[j]);
    return r;
  };
  std::uint64_t x = 1;
  for (std::uint64_t p = 1; p < f.leader.size(); ++p) {
    if (f.leader[p] != 0) x = std::max<std::uint64_t>(x, inputs[p].size());
  }
  auto out = detail::fold_up(f, inputs, slice_combine);
  tree_sweep(eng, f, true, x, slice_bits);
  return out;
}

/// Random-partition audit that slicing commutes with aggregation. Throws
/// NotSplittable on the first counterexample.
template <class T, class S, class Full, class Slice, class SliceCombine>
void audit_splittable(const std::vector<T>& values, Full full, Slice slice, SliceCombine slice_combine,
                      std::uint64_t seed, int trials = 16) {
  if (values.size() < 2) return;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    std::vector<const T*> a;
    std::vector<const T*> b;
    for (const auto& v : values) ((rng() & 1U) != 0 ? a : b).push_back(&v);
    if (a.empty() || b.empty()) continue;
    auto fold = [&](const std::vector<const T*>& xs) {
      T acc = *xs.front();
      for (std::size_t j = 1; j < xs.size(); ++j) acc = full(acc, *xs[j]);
      return acc;
    };
    const T fa = fold(a);
    const T fb = fold(b);
    const std::vector<S> want = slice(full(fa, fb));
    const std::vector<S> sa = slice(fa);
    const std::vector<S> sb = slice(fb);
    for (std::size_t j = 0; j < want.size(); ++j) {
      if (!(slice_combine(sa[j], sb[j]) == want[j])) {
        throw NotSplittable("slice " + std::to_string(j) + " does not aggregate independently");
      }
    }
  }
}

/// Node 1 draws k bits from its private stream `sub_seed`; every node ends
/// with a copy delivered over a single global tree. Result index = node id.
std::vector<std::vector<std::uint64_t>> broadcast_shared_randomness(Engine& eng, std::uint64_t k_bits,
                                                                    std::uint64_t sub_seed);

}  // namespace ncc
