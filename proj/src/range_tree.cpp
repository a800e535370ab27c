#include "ncc/range_tree.hpp"

#include <numeric>

#include "ncc/errors.hpp"

namespace ncc {

RangeForest::RangeForest(std::vector<NodeId> hosts, std::vector<Segment> segments,
                         std::uint32_t fanout)
    : hosts_(std::move(hosts)), segs_(std::move(segments)), d_(fanout) {
  if (d_ < 2) throw InvalidConfig("range tree fanout must be at least 2");
  std::size_t longest = 1;
  for (const auto& s : segs_) {
    if (s.begin > s.end || s.end > hosts_.size()) throw InvalidConfig("segment out of range");
    longest = std::max(longest, s.size());
  }
  pow_.push_back(1);
  while (pow_.back() < longest) pow_.push_back(pow_.back() * d_);
  pow_.push_back(pow_.back() * d_);
  seg_depth_.reserve(segs_.size());
  for (const auto& s : segs_) {
    std::uint32_t l = 0;
    while (pow_[l] < s.size()) ++l;
    seg_depth_.push_back(l);
    max_depth_ = std::max(max_depth_, l);
  }
}

RangeForest RangeForest::over_nodes(std::uint32_t n, std::uint32_t fanout) {
  std::vector<NodeId> hosts(n);
  std::iota(hosts.begin(), hosts.end(), NodeId{1});
  return RangeForest(std::move(hosts), {Segment{0, n}}, fanout);
}

}  // namespace ncc
