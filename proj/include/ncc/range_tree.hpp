#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ncc/engine.hpp"

namespace ncc {

/// Contiguous block [begin, end) of positions.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
};

/// Static d-ary trees over contiguous position ranges. Position p lives on
/// hosts[p]; a tree node covering [s, s + d^l) is hosted where position s is.
/// All segments advance level by level in the same exchanges.
class RangeForest {
 public:
  RangeForest(std::vector<NodeId> hosts, std::vector<Segment> segments, std::uint32_t fanout);

  /// Positions 0..n-1 hosted on nodes 1..n, one segment.
  static RangeForest over_nodes(std::uint32_t n, std::uint32_t fanout);

  const std::vector<Segment>& segments() const noexcept { return segs_; }
  std::uint32_t fanout() const noexcept { return d_; }
  std::uint32_t depth() const noexcept { return max_depth_; }

  /// Ordered fold of each segment, ending at the host of its first position.
  template <class T, class Op, class Bits>
  std::vector<T> reduce(Engine& eng, const std::vector<T>& vals, Op op, Bits bits) const {
    std::vector<std::vector<T>> parts;
    upsweep(eng, vals, op, bits, parts);
    std::vector<T> out;
    out.reserve(segs_.size());
    for (std::size_t s = 0; s < segs_.size(); ++s) out.push_back(parts[seg_depth_[s]][segs_[s].begin]);
    return out;
  }

  /// Sends seg_vals[s] from the first position of segment s to all its positions.
  template <class T, class Bits>
  std::vector<T> broadcast(Engine& eng, const std::vector<T>& seg_vals, Bits bits) const {
    std::vector<T> at(hosts_.size());
    for (std::size_t s = 0; s < segs_.size(); ++s) {
      if (segs_[s].size() > 0) at[segs_[s].begin] = seg_vals[s];
    }
    std::vector<Flow> flows;
    for (std::uint32_t lvl = max_depth_; lvl >= 1; --lvl) {
      flows.clear();
      const std::uint64_t step = pow_[lvl - 1];
      for_each_group(lvl, [&](std::size_t, std::size_t gs, std::size_t end) {
        for (std::size_t c = gs + step; c < end && c < gs + pow_[lvl]; c += step) {
          at[c] = at[gs];
          flows.push_back({hosts_[gs], hosts_[c], bits(at[gs])});
        }
      });
      eng.exchange(flows);
    }
    return at;
  }

  /// Exclusive prefix fold within each segment; optional per-segment totals.
  template <class T, class Op, class Bits>
  std::vector<T> exclusive_scan(Engine& eng, const std::vector<T>& vals, const T& identity, Op op,
                                Bits bits, std::vector<T>* totals = nullptr) const {
    std::vector<std::vector<T>> parts;
    upsweep(eng, vals, op, bits, parts);
    if (totals != nullptr) {
      totals->clear();
      for (std::size_t s = 0; s < segs_.size(); ++s) {
        totals->push_back(segs_[s].size() > 0 ? parts[seg_depth_[s]][segs_[s].begin] : identity);
      }
    }
    std::vector<T> pre(hosts_.size(), identity);
    std::vector<Flow> flows;
    for (std::uint32_t lvl = max_depth_; lvl >= 1; --lvl) {
      flows.clear();
      const std::uint64_t step = pow_[lvl - 1];
      for_each_group(lvl, [&](std::size_t, std::size_t gs, std::size_t end) {
        T acc = pre[gs];
        for (std::size_t c = gs; c < end && c < gs + pow_[lvl]; c += step) {
          if (c != gs) {
            pre[c] = acc;
            flows.push_back({hosts_[gs], hosts_[c], bits(acc)});
          }
          acc = op(acc, parts[lvl - 1][c]);
        }
      });
      eng.exchange(flows);
    }
    return pre;
  }

 private:
  template <class F>
  void for_each_group(std::uint32_t lvl, F&& f) const {
    for (std::size_t s = 0; s < segs_.size(); ++s) {
      if (seg_depth_[s] < lvl) continue;
      const auto& sg = segs_[s];
      for (std::size_t gs = sg.begin; gs < sg.end; gs += pow_[lvl]) f(s, gs, sg.end);
    }
  }

  template <class T, class Op, class Bits>
  void upsweep(Engine& eng, const std::vector<T>& vals, Op op, Bits bits,
               std::vector<std::vector<T>>& parts) const {
    parts.assign(max_depth_ + 1, {});
    parts[0] = vals;
    std::vector<Flow> flows;
    for (std::uint32_t lvl = 1; lvl <= max_depth_; ++lvl) {
      parts[lvl].resize(hosts_.size());
      flows.clear();
      const std::uint64_t step = pow_[lvl - 1];
      for_each_group(lvl, [&](std::size_t, std::size_t gs, std::size_t end) {
        T acc = parts[lvl - 1][gs];
        for (std::size_t c = gs + step; c < end && c < gs + pow_[lvl]; c += step) {
          flows.push_back({hosts_[c], hosts_[gs], bits(parts[lvl - 1][c])});
          acc = op(acc, parts[lvl - 1][c]);
        }
        parts[lvl][gs] = std::move(acc);
      });
      eng.exchange(flows);
    }
  }

  std::vector<NodeId> hosts_;
  std::vector<Segment> segs_;
  std::vector<std::uint32_t> seg_depth_;
  std::vector<std::uint64_t> pow_;
  std::uint32_t d_;
  std::uint32_t max_depth_ = 0;
};

}  // namespace ncc
