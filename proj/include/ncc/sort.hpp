#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "ncc/engine.hpp"
#include "ncc/errors.hpp"
#include "ncc/range_tree.hpp"

namespace ncc {

struct SortOptions {
  /// Keys per node in the output; 0 picks the smallest multiple of max_msgs
  /// covering the largest input list.
  std::uint64_t cap = 0;
  /// Also compute ranks: the 0-based position of the first equal key.
  bool ranks = false;
};

template <class T>
struct SortResult {
  std::vector<std::vector<T>> slices;                 // [node - 1]
  std::vector<std::vector<std::uint64_t>> ranks;      // filled when requested
  std::uint64_t cap = 0;
  std::uint32_t levels = 0;
};

/// Fanout of the sample sort recursion.
inline std::uint32_t sort_fanout(std::uint32_t n) {
  return std::max<std::uint32_t>(2, ceil_log2(n) / 2);
}

/// Recursive sample sort over contiguous node blocks. keys[i] is the input of
/// node i + 1; node i ends with the sorted positions [(i - 1) cap, i cap).
template <class T, class Less>
SortResult<T> sort_distributed(Engine& eng, const std::vector<std::vector<T>>& keys, Less less,
                               std::uint64_t key_bits, const SortOptions& opt = {}) {
  const std::uint32_t n = eng.n();
  if (keys.size() != n) throw InvalidConfig("one key list per node expected");
  const std::uint64_t alpha = eng.budget().max_msgs;
  std::uint64_t longest = 0;
  std::uint64_t total = 0;
  for (const auto& k : keys) {
    longest = std::max<std::uint64_t>(longest, k.size());
    total += k.size();
  }
  std::uint64_t cap = opt.cap;
  if (cap == 0) cap = std::max<std::uint64_t>(1, (longest + alpha - 1) / alpha) * alpha;
  if (longest > cap || total > cap * n) {
    throw TooManyKeys(std::to_string(total) + " keys exceed " + std::to_string(cap) + " per node");
  }

  struct Item {
    T key;
    NodeId origin;
    std::uint32_t idx;
  };
  auto item_less = [&](const Item& a, const Item& b) {
    if (less(a.key, b.key)) return true;
    if (less(b.key, a.key)) return false;
    if (a.origin != b.origin) return a.origin < b.origin;
    return a.idx < b.idx;
  };
  const std::uint64_t ibits = key_bits + id_bits(n) + id_bits(cap);

  std::vector<std::vector<Item>> held(n);
  for (NodeId v = 1; v <= n; ++v) {
    held[v - 1].reserve(keys[v - 1].size());
    for (std::uint32_t i = 0; i < keys[v - 1].size(); ++i) held[v - 1].push_back(Item{keys[v - 1][i], v, i});
  }
  std::vector<NodeId> hosts(n);
  for (NodeId v = 1; v <= n; ++v) hosts[v - 1] = v;

  const std::uint32_t d = sort_fanout(n);
  const std::size_t sample_target = 8ULL * d;
  SortResult<T> res;
  res.cap = cap;

  std::vector<Segment> blocks{Segment{0, n}};
  while (true) {
    std::vector<Segment> active;
    for (const auto& b : blocks) {
      if (b.size() > 1) active.push_back(b);
    }
    if (active.empty()) break;
    ++res.levels;
    for (auto& h : held) std::sort(h.begin(), h.end(), item_less);

    // Regular samples, merged and thinned up each block's tree.
    using Sample = std::vector<Item>;
    auto thin = [&](Sample s) {
      if (s.size() <= sample_target) return s;
      Sample out;
      out.reserve(sample_target);
      for (std::size_t j = 0; j < sample_target; ++j) out.push_back(s[(2 * j + 1) * s.size() / (2 * sample_target)]);
      return out;
    };
    std::vector<Sample> samples(n);
    for (NodeId v = 1; v <= n; ++v) samples[v - 1] = thin(held[v - 1]);
    const RangeForest forest(hosts, active, d);
    auto merge = [&](const Sample& a, const Sample& b) {
      Sample m;
      m.reserve(a.size() + b.size());
      std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(m), item_less);
      return thin(std::move(m));
    };
    auto sample_bits = [&](const Sample& s) { return std::max<std::uint64_t>(1, s.size() * ibits); };
    const auto roots = forest.reduce(eng, samples, merge, sample_bits);

    // Sub-blocks and splitters at each block root.
    std::vector<std::vector<Segment>> subs(active.size());
    std::vector<Sample> splitters(active.size());
    for (std::size_t s = 0; s < active.size(); ++s) {
      const std::size_t len = active[s].size();
      const std::size_t parts = std::min<std::size_t>(d, len);
      std::size_t at = active[s].begin;
      for (std::size_t j = 0; j < parts; ++j) {
        const std::size_t sz = len / parts + (j < len % parts ? 1 : 0);
        subs[s].push_back(Segment{at, at + sz});
        at += sz;
      }
      const Sample& smp = roots[s];
      std::size_t cum = 0;
      for (std::size_t j = 0; j + 1 < parts && !smp.empty(); ++j) {
        cum += subs[s][j].size();
        splitters[s].push_back(smp[std::min(smp.size() - 1, cum * smp.size() / len)]);
      }
    }
    const auto spl = forest.broadcast(eng, splitters, sample_bits);

    // Buckets spread round-robin over the nodes of each sub-block.
    std::vector<std::vector<Item>> next(n);
    std::map<std::pair<NodeId, NodeId>, std::uint64_t> load;
    for (std::size_t s = 0; s < active.size(); ++s) {
      for (std::size_t pos = active[s].begin; pos < active[s].end; ++pos) {
        const auto& mine = held[pos];
        const auto& sp = spl[pos];
        std::size_t i = 0;
        for (std::size_t b = 0; b < subs[s].size(); ++b) {
          const Segment& sub = subs[s][b];
          std::size_t j = 0;
          while (i < mine.size() && (b + 1 == subs[s].size() || b >= sp.size() || item_less(mine[i], sp[b]))) {
            const std::size_t dst = sub.begin + (pos - active[s].begin + j) % sub.size();
            next[dst].push_back(mine[i]);
            load[{static_cast<NodeId>(pos + 1), static_cast<NodeId>(dst + 1)}] += ibits;
            ++i;
            ++j;
          }
        }
      }
    }
    for (const auto& b : blocks) {
      if (b.size() == 1) {
        for (auto& it : held[b.begin]) next[b.begin].push_back(std::move(it));
      }
    }
    std::vector<Flow> flows;
    flows.reserve(load.size());
    for (const auto& [ab, bits] : load) flows.push_back({ab.first, ab.second, bits});
    eng.exchange(flows);
    held = std::move(next);

    std::vector<Segment> nb;
    for (const auto& b : blocks) {
      if (b.size() == 1) nb.push_back(b);
    }
    for (const auto& s : subs) nb.insert(nb.end(), s.begin(), s.end());
    std::sort(nb.begin(), nb.end(), [](const Segment& a, const Segment& b) { return a.begin < b.begin; });
    blocks = std::move(nb);
  }

  // Global offsets, then each key moves to the node owning its position.
  for (auto& h : held) std::sort(h.begin(), h.end(), item_less);
  const RangeForest all = RangeForest::over_nodes(n, d);
  std::vector<std::uint64_t> counts(n);
  for (NodeId v = 1; v <= n; ++v) counts[v - 1] = held[v - 1].size();
  const auto offset = all.exclusive_scan(eng, counts, std::uint64_t{0},
                                         [](std::uint64_t a, std::uint64_t b) { return a + b; },
                                         [&](std::uint64_t) { return std::uint64_t{id_bits(total)}; });
  res.slices.assign(n, {});
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> load;
  for (NodeId v = 1; v <= n; ++v) {
    for (std::size_t i = 0; i < held[v - 1].size(); ++i) {
      const std::uint64_t pos = offset[v - 1] + i;
      const auto dst = static_cast<NodeId>(pos / cap + 1);
      res.slices[dst - 1].push_back(held[v - 1][i].key);
      load[{v, dst}] += ibits;
    }
  }
  std::vector<Flow> flows;
  for (const auto& [ab, bits] : load) flows.push_back({ab.first, ab.second, bits});
  eng.exchange(flows);

  if (opt.ranks) {
    // Segmented carry: where does the run containing a node's first key start.
    struct Carry {
      bool any = false;
      bool uniform = true;
      T first{};
      T last{};
      std::uint64_t last_start = 0;
    };
    auto eq = [&](const T& a, const T& b) { return !less(a, b) && !less(b, a); };
    std::vector<Carry> local(n);
    for (NodeId v = 1; v <= n; ++v) {
      const auto& sl = res.slices[v - 1];
      if (sl.empty()) continue;
      Carry c;
      c.any = true;
      c.first = sl.front();
      c.last = sl.back();
      std::size_t j = sl.size() - 1;
      while (j > 0 && eq(sl[j - 1], sl.back())) --j;
      c.uniform = j == 0;
      c.last_start = (v - 1) * cap + j;
      local[v - 1] = c;
    }
    auto op = [&](const Carry& a, const Carry& b) {
      if (!b.any) return a;
      if (!a.any) return b;
      Carry r = b;
      r.first = a.first;
      const bool join = eq(a.last, b.first);
      r.uniform = a.uniform && b.uniform && join;
      if (b.uniform && join) r.last_start = a.last_start;
      return r;
    };
    const auto pre = all.exclusive_scan(eng, local, Carry{}, op,
                                        [&](const Carry&) { return 2 * key_bits + id_bits(total) + 2; });
    res.ranks.assign(n, {});
    for (NodeId v = 1; v <= n; ++v) {
      const auto& sl = res.slices[v - 1];
      auto& rk = res.ranks[v - 1];
      rk.resize(sl.size());
      for (std::size_t j = 0; j < sl.size(); ++j) {
        const std::uint64_t pos = (v - 1) * cap + j;
        if (j > 0 && eq(sl[j - 1], sl[j])) {
          rk[j] = rk[j - 1];
        } else if (j == 0 && pre[v - 1].any && eq(pre[v - 1].last, sl[0])) {
          rk[j] = pre[v - 1].last_start;
        } else {
          rk[j] = pos;
        }
      }
    }
  }
  return res;
}

}  // namespace ncc
