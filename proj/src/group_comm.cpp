#include "ncc/group_comm.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ncc/range_tree.hpp"
#include "ncc/sort.hpp"

namespace ncc {

Partition Partition::single_set(std::uint32_t n, std::uint64_t leader) {
  Partition p;
  p.n = n;
  p.leader.assign(n + 1, leader);
  p.leader[0] = 0;
  return p;
}

Partition Partition::singletons(std::uint32_t n) {
  Partition p;
  p.n = n;
  p.leader.resize(n + 1);
  for (std::uint32_t v = 0; v <= n; ++v) p.leader[v] = v;
  return p;
}

Partition Partition::from_leaders(std::uint32_t n, const std::vector<std::uint64_t>& leaders) {
  if (leaders.size() != n) throw InvalidConfig("one leader per node expected");
  Partition p;
  p.n = n;
  p.leader.assign(n + 1, 0);
  for (std::uint32_t v = 1; v <= n; ++v) p.leader[v] = leaders[v - 1];
  return p;
}

void Partition::validate() const {
  if (n < 2 || factor < 1) throw InvalidConfig("partition needs n >= 2 and factor >= 1");
  if (leader.size() != universe() + 1) throw InvalidConfig("partition size does not match factor * n");
  for (std::uint64_t p = 1; p < leader.size(); ++p) {
    const std::uint64_t l = leader[p];
    if (l == 0) continue;
    if (l > universe()) throw InvalidConfig("leader id out of range");
    if (leader[l] != l) throw InvalidConfig("leader " + std::to_string(l) + " is not a member of its own set");
  }
}

std::uint32_t comm_fanout(std::uint32_t n, std::uint64_t c_bits) {
  const std::uint64_t lg = ceil_log2(n);
  return static_cast<std::uint32_t>(std::max<std::uint64_t>(2, lg * lg / std::max<std::uint64_t>(c_bits, 1)));
}

std::uint64_t max_tree_message_bits(std::uint32_t n) {
  const std::uint64_t lg = ceil_log2(n);
  return std::max<std::uint64_t>(1, lg * lg / 2);
}

namespace {

std::vector<std::uint64_t> level_widths(std::uint64_t s, std::uint32_t d) {
  std::vector<std::uint64_t> w{s};
  while (w.back() > 1) w.push_back((w.back() + d - 1) / d);
  return w;  // w[L] == 1 is the root
}

std::uint64_t inner_count(std::uint64_t s, std::uint32_t d) {
  const auto w = level_widths(s, d);
  std::uint64_t total = 0;
  for (std::size_t l = 1; l + 1 < w.size(); ++l) total += w[l];
  return total;
}

// Carried (size, offset) of the run owning a node's first element, scanned
// from the highest node downwards.
struct RunCarry {
  bool any = false;
  bool open = false;  // the node's first run does not end inside it
  std::uint64_t right_leader = 0;
  std::uint64_t left_leader = 0;
  std::uint64_t size = 0;
  std::uint64_t offset = 0;
};

RunCarry carry_combine(const RunCarry& a, const RunCarry& b) {
  if (!b.any) return a;
  if (!a.any) return b;
  RunCarry r = b;
  r.right_leader = a.right_leader;
  if (b.open && a.left_leader == b.left_leader) {
    r.open = a.open;
    r.size = a.size;
    r.offset = a.offset;
  }
  return r;
}

}  // namespace

CommForest build_comm_trees(Engine& eng, const Partition& part, std::uint64_t c_bits) {
  part.validate();
  const std::uint32_t n = eng.n();
  if (part.n != n) throw InvalidConfig("partition built for a different n");
  if (c_bits > max_tree_message_bits(n)) {
    throw MessageSizeTooLarge(std::to_string(c_bits) + " bits > log^2 n / 2 = " +
                              std::to_string(max_tree_message_bits(n)));
  }
  const std::uint32_t d = comm_fanout(n, c_bits);
  const std::uint64_t universe = part.universe();
  const std::uint32_t idb = id_bits(2 * universe);

  struct Key {
    std::uint64_t leader;
    std::uint64_t pid;
  };
  std::vector<std::vector<Key>> keys(n);
  for (std::uint64_t p = 1; p <= universe; ++p) {
    if (part.leader[p] != 0) keys[host_of(p, n) - 1].push_back(Key{part.leader[p], p});
  }
  SortOptions opt;
  opt.ranks = true;
  opt.cap = part.factor;
  auto by_leader = [](const Key& a, const Key& b) { return a.leader < b.leader; };
  const auto sorted = sort_distributed(eng, keys, by_leader, 2ULL * idb, opt);
  const auto& sl = sorted.slices;

  // Each node learns the first leader on the next node.
  std::vector<Flow> flows;
  for (NodeId v = 1; v < n; ++v) {
    if (!sl[v].empty()) flows.push_back({v + 1, v, idb});
  }
  eng.exchange(flows);
  auto is_run_end = [&](NodeId v, std::size_t j) {
    if (j + 1 < sl[v - 1].size()) return sl[v - 1][j + 1].leader != sl[v - 1][j].leader;
    return v == n || sl[v].empty() || sl[v].front().leader != sl[v - 1][j].leader;
  };

  // Run ends know their set size; a sum scan places the inner-id blocks.
  std::vector<std::uint64_t> need(n, 0);
  for (NodeId v = 1; v <= n; ++v) {
    for (std::size_t j = 0; j < sl[v - 1].size(); ++j) {
      if (!is_run_end(v, j)) continue;
      const std::uint64_t pos = (v - 1) * sorted.cap + j;
      need[v - 1] += inner_count(pos - sorted.ranks[v - 1][j] + 1, d);
    }
  }
  const RangeForest over = RangeForest::over_nodes(n, std::max<std::uint32_t>(2, eng.log_n()));
  const auto base = over.exclusive_scan(eng, need, std::uint64_t{0},
                                        [](std::uint64_t a, std::uint64_t b) { return a + b; },
                                        [&](std::uint64_t) { return std::uint64_t{idb}; });

  // (size, offset) flow from each run end back to the start of its run.
  std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> info(n);
  std::vector<RunCarry> local(n);
  for (NodeId v = 1; v <= n; ++v) {
    const auto& s = sl[v - 1];
    info[v - 1].assign(s.size(), {0, 0});
    if (s.empty()) continue;
    std::uint64_t off = base[v - 1];
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!is_run_end(v, j)) continue;
      const std::uint64_t size = (v - 1) * sorted.cap + j - sorted.ranks[v - 1][j] + 1;
      info[v - 1][j] = {size, off};
      off += inner_count(size, d);
    }
    for (std::size_t j = s.size(); j-- > 0;) {
      if (info[v - 1][j].first == 0 && j + 1 < s.size()) info[v - 1][j] = info[v - 1][j + 1];
    }
    RunCarry c;
    c.any = true;
    c.right_leader = s.back().leader;
    c.left_leader = s.front().leader;
    c.open = info[v - 1][0].first == 0;
    c.size = info[v - 1][0].first;
    c.offset = info[v - 1][0].second;
    local[v - 1] = c;
  }
  std::vector<NodeId> rev_hosts(n);
  std::vector<RunCarry> rev_local(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    rev_hosts[i] = n - i;
    rev_local[i] = local[n - 1 - i];
  }
  const RangeForest rev(rev_hosts, {Segment{0, n}}, std::max<std::uint32_t>(2, eng.log_n()));
  const auto carried = rev.exclusive_scan(eng, rev_local, RunCarry{}, carry_combine,
                                          [&](const RunCarry&) { return 4ULL * idb + 2; });
  for (NodeId v = 1; v <= n; ++v) {
    const auto& from_right = carried[n - v];
    for (std::size_t j = sl[v - 1].size(); j-- > 0;) {
      if (info[v - 1][j].first != 0) break;
      info[v - 1][j] = {from_right.size, from_right.offset};
    }
  }

  // Records go back to the participants, who then introduce themselves to
  // the inner nodes whose first leaf they are.
  CommForest f;
  f.n = n;
  f.factor = part.factor;
  f.fanout = d;
  f.c_bits = c_bits;
  f.leader = part.leader;
  f.leaf_parent.assign(universe + 1, 0);
  f.set_depth.assign(universe + 1, 0);
  f.root_children.assign(universe + 1, {});

  std::map<std::uint64_t, std::vector<std::uint64_t>> members;
  std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> set_info;
  flows.clear();
  for (NodeId v = 1; v <= n; ++v) {
    for (std::size_t j = 0; j < sl[v - 1].size(); ++j) {
      const auto& k = sl[v - 1][j];
      members[k.leader].push_back(k.pid);
      set_info[k.leader] = info[v - 1][j];
      flows.push_back({v, host_of(k.pid, n), 4ULL * idb});
    }
  }
  eng.exchange(flows);

  std::uint64_t total_inner = 0;
  for (const auto& [l, si] : set_info) total_inner = std::max(total_inner, si.second + inner_count(si.first, d));
  f.inner.resize(total_inner);
  flows.clear();
  for (const auto& [l, ms] : members) {
    const auto [size, off] = set_info[l];
    if (size != ms.size()) throw InvalidConfig("set size mismatch while building trees");
    const auto w = level_widths(size, d);
    const auto depth = static_cast<std::uint32_t>(w.size() - 1);
    f.set_depth[l] = depth;
    f.max_depth = std::max(f.max_depth, depth);
    std::vector<std::uint64_t> lvl_base(w.size(), 0);
    std::uint64_t acc = f.first_inner() + off;
    for (std::size_t lv = 1; lv + 1 < w.size(); ++lv) {
      lvl_base[lv] = acc;
      acc += w[lv];
    }
    auto id_at = [&](std::size_t lv, std::uint64_t j) -> std::uint64_t {
      if (lv == 0) return ms[j];
      if (lv + 1 == w.size()) return l;
      return lvl_base[lv] + j;
    };
    for (std::size_t lv = 0; lv + 1 < w.size(); ++lv) {
      for (std::uint64_t j = 0; j < w[lv]; ++j) {
        const std::uint64_t id = id_at(lv, j);
        const std::uint64_t parent = id_at(lv + 1, j / d);
        if (lv == 0) {
          f.leaf_parent[id] = parent;
        } else {
          auto& nd = f.inner[id - f.first_inner()];
          nd.id = id;
          nd.leader = l;
          nd.parent = parent;
          nd.level = static_cast<std::uint32_t>(lv);
        }
        if (lv + 2 == w.size()) f.root_children[l].push_back(id);
        else f.inner[parent - f.first_inner()].children.push_back(id);
      }
    }
    if (size == 1) f.leaf_parent[l] = l;
    // leaf j introduces itself to every ancestor whose subtree starts at j
    for (std::uint64_t j = 0; j < size; ++j) {
      std::uint64_t span = d;
      for (std::size_t lv = 1; lv + 1 < w.size() && j % span == 0; ++lv, span *= d) {
        flows.push_back({host_of(ms[j], n), host_of(id_at(lv, j / span), n), 4ULL * idb});
      }
    }
  }
  eng.exchange(flows);
  return f;
}

std::string CommForest::audit(const Partition& p) const {
  if (p.leader != leader) return "leader map differs from the partition";
  std::map<std::uint64_t, std::uint64_t> leaves_per_set;
  for (std::uint64_t q = 1; q < leader.size(); ++q) {
    if (leader[q] == 0) continue;
    ++leaves_per_set[leader[q]];
    // walk to the root
    std::uint64_t cur = leaf_parent[q];
    std::uint32_t steps = 1;
    while (is_inner(cur)) {
      const auto& nd = inner_at(cur);
      if (nd.leader != leader[q]) return "inner node " + std::to_string(cur) + " serves two sets";
      cur = nd.parent;
      ++steps;
    }
    if (cur != leader[q]) return "participant " + std::to_string(q) + " does not reach its leader";
    const std::uint32_t want = set_depth[leader[q]];
    if (!(steps == want || (want == 0 && cur == q))) {
      return "leaf " + std::to_string(q) + " at depth " + std::to_string(steps) + ", tree depth " + std::to_string(want);
    }
  }
  std::set<std::uint64_t> seen;
  for (const auto& nd : inner) {
    if (nd.id == 0) continue;
    if (!seen.insert(nd.id).second) return "inner id reused";
    if (nd.children.empty() || nd.children.size() > fanout) return "inner node with bad fanout";
    for (auto c : nd.children) {
      const std::uint64_t l = is_inner(c) ? inner_at(c).leader : leader[c];
      if (l != nd.leader) return "child from another set";
    }
  }
  for (const auto& [l, cnt] : leaves_per_set) {
    std::uint32_t bound = 0;
    for (std::uint64_t span = 1; span < cnt; span *= fanout) ++bound;
    if (set_depth[l] != bound) return "depth above ceil(log_d |X|)";
    if (root_children[l].size() > fanout) return "root fanout too large";
  }
  return {};
}

std::uint64_t tree_sweep(Engine& eng, const CommForest& f, bool upward, std::uint64_t chunks,
                         std::uint64_t chunk_bits) {
  if (chunks == 0) return 0;
  std::map<std::uint64_t, std::vector<Flow>> by_start;
  auto add = [&](std::uint64_t child, std::uint64_t parent, std::uint32_t level) {
    if (child == parent) return;
    const std::uint32_t depth = f.set_depth[f.is_inner(child) ? f.inner_at(child).leader : f.leader[child]];
    const std::uint64_t start = upward ? level : depth - 1 - level;
    const NodeId a = f.host(child);
    const NodeId b = f.host(parent);
    by_start[start].push_back(upward ? Flow{a, b, chunk_bits} : Flow{b, a, chunk_bits});
  };
  for (std::uint64_t p = 1; p < f.leader.size(); ++p) {
    if (f.leader[p] != 0) add(p, f.leaf_parent[p], 0);
  }
  for (const auto& nd : f.inner) {
    if (nd.id != 0) add(nd.id, nd.parent, nd.level);
  }
  std::set<std::uint64_t> marks;
  for (const auto& [s, fl] : by_start) {
    marks.insert(s);
    marks.insert(s + chunks);
  }
  std::uint64_t used = 0;
  std::vector<Flow> active;
  for (auto it = marks.begin(); it != marks.end(); ++it) {
    auto nx = std::next(it);
    if (nx == marks.end()) break;
    const std::uint64_t t = *it;
    active.clear();
    for (const auto& [s, fl] : by_start) {
      if (s <= t && t < s + chunks) active.insert(active.end(), fl.begin(), fl.end());
    }
    if (!active.empty()) used += eng.exchange(active, *nx - t);
  }
  return used;
}

namespace {

std::uint64_t low_mask(std::uint64_t len) { return len >= 64 ? ~0ULL : (1ULL << len) - 1; }

// len <= 64 bits starting at bit `at`.
std::uint64_t get_bits(const std::vector<std::uint64_t>& w, std::uint64_t at, std::uint64_t len) {
  const std::uint64_t q = at / 64;
  const std::uint64_t r = at % 64;
  std::uint64_t v = w[q] >> r;
  if (r != 0 && r + len > 64 && q + 1 < w.size()) v |= w[q + 1] << (64 - r);
  return v & low_mask(len);
}

void put_bits(std::vector<std::uint64_t>& w, std::uint64_t at, std::uint64_t len, std::uint64_t v) {
  v &= low_mask(len);
  const std::uint64_t q = at / 64;
  const std::uint64_t r = at % 64;
  w[q] |= v << r;
  if (r != 0 && r + len > 64) w[q + 1] |= v >> (64 - r);
}

}  // namespace

std::vector<std::vector<std::uint64_t>> broadcast_shared_randomness(Engine& eng, std::uint64_t k_bits,
                                                                    std::uint64_t sub_seed) {
  if (k_bits < 1) throw InvalidConfig("need at least one shared bit");
  const std::uint32_t n = eng.n();
  const std::uint64_t words = (k_bits + 63) / 64;
  std::vector<std::uint64_t> drawn(words);
  Rng rng = eng.node_rng(1, derive_seed(sub_seed, 0x5eed));
  for (auto& w : drawn) w = rng();
  if (k_bits % 64 != 0) drawn.back() &= (1ULL << (k_bits % 64)) - 1;

  const std::uint64_t c = std::min<std::uint64_t>(64, max_tree_message_bits(n));
  const CommForest f = build_comm_trees(eng, Partition::single_set(n, 1), c);
  std::vector<std::vector<std::uint64_t>> at_leader(n + 1);
  for (std::uint64_t at = 0; at < k_bits; at += c) at_leader[1].push_back(get_bits(drawn, at, std::min(c, k_bits - at)));
  const auto got = multicast_pipelined(eng, f, at_leader, c);

  std::vector<std::vector<std::uint64_t>> out(n + 1);
  for (NodeId v = 1; v <= n; ++v) {
    auto& w = out[v];
    w.assign(words, 0);
    std::uint64_t at = 0;
    for (std::uint64_t chunk : got[v]) {
      const std::uint64_t len = std::min(c, k_bits - at);
      put_bits(w, at, len, chunk);
      at += len;
    }
  }
  return out;
}

}  // namespace ncc
