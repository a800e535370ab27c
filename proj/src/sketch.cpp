#include "ncc/sketch.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>
#include <unordered_set>

#include "ncc/errors.hpp"
#include "ncc/rng.hpp"

namespace ncc {

namespace {

std::uint64_t draw_field(Rng& rng) {
  for (;;) {
    const std::uint64_t x = rng() >> 3;
    if (x < field::kPrime) return x;
  }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw Error("truncated sketch");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= std::uint64_t{in[pos + i]} << (8 * i);
  pos += 8;
  return x;
}

using CellVec = std::vector<std::pair<std::uint32_t, OneSparseCell>>;

// Cell contributions of a batch of updates, sorted and combined.
CellVec contributions(const SketchParams& p, const SketchSeeds& sd, std::span<const Update> updates) {
  CellVec out;
  const std::uint32_t per = p.levels * p.buckets;
  if (2 * updates.size() * p.samplers > p.cells()) {
    // Large batches: accumulate densely instead of sorting every contribution.
    std::vector<OneSparseCell> dense(p.cells());
    std::vector<char> touched(p.cells(), 0);
    for (const auto& u : updates) {
      const std::uint64_t d = field::from_signed(u.delta);
      if (d == 0) continue;
      const std::uint64_t zp = sd.power(u.index);
      OneSparseCell c;
      c.update(u.index, d, zp);
      for (std::uint32_t s = 0; s < p.samplers; ++s) {
        const std::uint32_t m = sd.depth(s, u.index, p.levels);
        const auto b = static_cast<std::uint32_t>(sd.bucket_hash[s](u.index, p.buckets));
        for (std::uint32_t l = 0; l < m; ++l) {
          const std::uint32_t at = s * per + l * p.buckets + b;
          dense[at] += c;
          touched[at] = 1;
        }
      }
    }
    for (std::uint32_t i = 0; i < dense.size(); ++i) {
      if (touched[i]) out.emplace_back(i, dense[i]);
    }
    return out;
  }
  for (const auto& u : updates) {
    const std::uint64_t d = field::from_signed(u.delta);
    if (d == 0) continue;
    const std::uint64_t zp = sd.power(u.index);
    OneSparseCell c;
    c.update(u.index, d, zp);
    for (std::uint32_t s = 0; s < p.samplers; ++s) {
      const std::uint32_t m = sd.depth(s, u.index, p.levels);
      const auto b = static_cast<std::uint32_t>(sd.bucket_hash[s](u.index, p.buckets));
      for (std::uint32_t l = 0; l < m; ++l) out.emplace_back(s * per + l * p.buckets + b, c);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  CellVec merged;
  for (const auto& e : out) {
    if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
    else merged.push_back(e);
  }
  return merged;
}

CellVec merge(const CellVec& a, const CellVec& b) {
  CellVec out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      auto c = a[i].second;
      c += b[j].second;
      if (!c.zero()) out.emplace_back(a[i].first, c);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

KWiseHash::KWiseHash(std::uint32_t k, std::uint64_t seed) {
  Rng rng(seed);
  coeffs_.resize(std::max<std::uint32_t>(k, 1));
  for (auto& c : coeffs_) c = draw_field(rng);
}

KWiseHash::KWiseHash(std::vector<std::uint64_t> coeffs) : coeffs_(std::move(coeffs)) {
  for (auto& c : coeffs_) c = field::reduce(c);
}

std::optional<Coord> one_sparse_decide(const OneSparseCell& cell, std::uint64_t z, std::uint64_t dim) {
  if (cell.phi == 0) return std::nullopt;
  const std::uint64_t idx = field::mul(cell.iota, field::inverse(cell.phi));
  if (idx >= dim) return std::nullopt;
  if (cell.tau != field::mul(cell.phi, field::pow(z, idx))) return std::nullopt;
  return Coord{idx, field::to_signed(cell.phi)};
}

SketchParams l0_params(std::uint64_t dim, std::uint64_t seed) {
  SketchParams p;
  p.dim = dim;
  p.k = 0;
  p.samplers = 1;
  p.levels = ceil_log2(dim) + 1;
  p.buckets = 4;
  p.level_degree = 8;
  p.bucket_degree = 2;
  p.seed = seed;
  return p;
}

SketchParams ksparse_params(std::uint64_t dim, std::uint32_t k, std::uint64_t seed, std::uint32_t c_s) {
  SketchParams p;
  p.dim = dim;
  p.k = std::max<std::uint32_t>(k, 1);
  p.samplers = c_s * (p.k + ceil_log2(dim));
  p.levels = ceil_log2(2 * std::uint64_t{p.k}) + 1;
  p.buckets = 4;
  p.level_degree = 4;
  p.bucket_degree = 2;
  p.seed = seed;
  return p;
}

SketchSeeds::SketchSeeds(const SketchParams& p) {
  Rng rng(derive_seed(p.seed, 0x5ce7c4));
  level_hash.reserve(p.samplers);
  bucket_hash.reserve(p.samplers);
  for (std::uint32_t s = 0; s < p.samplers; ++s) {
    level_hash.emplace_back(p.level_degree, rng());
    bucket_hash.emplace_back(p.bucket_degree, rng());
  }
  do {
    z = draw_field(rng);
  } while (z < 2);
}

std::shared_ptr<const SketchSeeds> sketch_seeds(const SketchParams& p) {
  using Key = std::tuple<std::uint64_t, std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t,
                         std::uint64_t>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const SketchSeeds>> cache;
  const Key key{p.dim, p.samplers, p.levels, p.level_degree, p.bucket_degree, p.buckets, p.seed};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  if (cache.size() >= 64) cache.clear();
  auto sd = std::make_shared<const SketchSeeds>(p);
  cache.emplace(key, sd);
  return sd;
}

LinearSketch::LinearSketch(const SketchParams& p) : params_(p), seeds_(sketch_seeds(p)) {}

LinearSketch LinearSketch::encode(const SketchParams& p, std::span<const Update> updates) {
  LinearSketch s(p);
  s.apply(updates);
  return s;
}

void LinearSketch::apply(std::span<const Update> updates) {
  for (const auto& u : updates) {
    if (u.index >= params_.dim) throw Error("sketch index " + std::to_string(u.index) + " out of range");
  }
  auto add = contributions(params_, *seeds_, updates);
  cells_ = merge(cells_, add);
  std::erase_if(cells_, [](const auto& e) { return e.second.zero(); });
}

LinearSketch& LinearSketch::operator+=(const LinearSketch& o) {
  if (!(params_ == o.params_)) throw SeedMismatch("sketches built from different parameters or seeds");
  cells_ = merge(cells_, o.cells_);
  return *this;
}

LinearSketch LinearSketch::operator-() const {
  LinearSketch r = *this;
  for (auto& [i, c] : r.cells_) {
    c.phi = field::neg(c.phi);
    c.iota = field::neg(c.iota);
    c.tau = field::neg(c.tau);
  }
  return r;
}

LinearSketch& LinearSketch::operator-=(const LinearSketch& o) { return *this += -o; }

std::vector<std::uint8_t> LinearSketch::serialize() const {
  std::vector<std::uint8_t> out;
  const std::uint64_t header[] = {params_.dim,          params_.k,
                                  params_.samplers,     params_.levels,
                                  params_.buckets,      params_.level_degree,
                                  params_.bucket_degree, params_.seed};
  put_u64(out, std::size(header));
  for (auto h : header) put_u64(out, h);
  const std::uint64_t cells = params_.cells();
  put_u64(out, cells * 3);
  std::size_t j = 0;
  for (std::uint64_t i = 0; i < cells; ++i) {
    OneSparseCell c;
    if (j < cells_.size() && cells_[j].first == i) c = cells_[j++].second;
    put_u64(out, c.phi);
    put_u64(out, c.iota);
    put_u64(out, c.tau);
  }
  return out;
}

LinearSketch LinearSketch::deserialize(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (get_u64(bytes, pos) != 8) throw Error("bad sketch header");
  SketchParams p;
  p.dim = get_u64(bytes, pos);
  p.k = static_cast<std::uint32_t>(get_u64(bytes, pos));
  p.samplers = static_cast<std::uint32_t>(get_u64(bytes, pos));
  p.levels = static_cast<std::uint32_t>(get_u64(bytes, pos));
  p.buckets = static_cast<std::uint32_t>(get_u64(bytes, pos));
  p.level_degree = static_cast<std::uint32_t>(get_u64(bytes, pos));
  p.bucket_degree = static_cast<std::uint32_t>(get_u64(bytes, pos));
  p.seed = get_u64(bytes, pos);
  if (get_u64(bytes, pos) != p.cells() * 3) throw Error("sketch length does not match its parameters");
  LinearSketch s(p);
  for (std::uint64_t i = 0; i < p.cells(); ++i) {
    OneSparseCell c;
    c.phi = get_u64(bytes, pos);
    c.iota = get_u64(bytes, pos);
    c.tau = get_u64(bytes, pos);
    if (c.phi >= field::kPrime || c.iota >= field::kPrime || c.tau >= field::kPrime) {
      throw Error("sketch cell outside the field");
    }
    if (!c.zero()) s.cells_.emplace_back(static_cast<std::uint32_t>(i), c);
  }
  if (pos != bytes.size()) throw Error("trailing bytes after sketch");
  return s;
}

std::optional<Coord> l0_sample(const LinearSketch& s) {
  const auto& p = s.params();
  const auto& sd = s.seeds();
  const auto& cells = s.nonzero_cells();
  const std::uint32_t per = p.levels * p.buckets;
  // sampler 0 only; cells of a sampler are contiguous
  int deep = -1;
  for (const auto& [i, c] : cells) {
    if (i >= per) break;
    deep = std::max<int>(deep, static_cast<int>(i / p.buckets));
  }
  if (deep < 0) return std::nullopt;
  std::optional<Coord> best;
  std::uint64_t best_h = 0;
  for (const auto& [i, c] : cells) {
    if (i / p.buckets != static_cast<std::uint32_t>(deep)) continue;
    auto r = one_sparse_decide(c, sd.z, p.dim);
    if (!r) continue;
    if (sd.depth(0, r->index, p.levels) <= static_cast<std::uint32_t>(deep)) continue;
    if (sd.bucket_hash[0](r->index, p.buckets) != i % p.buckets) continue;
    const std::uint64_t h = sd.level_hash[0].field(r->index);
    if (!best || h < best_h) {
      best = r;
      best_h = h;
    }
  }
  return best;
}

DecodeResult ksparse_decode(const LinearSketch& s, std::uint32_t c_dense) {
  const auto& p = s.params();
  const auto& sd = s.seeds();
  const std::uint32_t L = p.levels;
  const std::uint32_t B = p.buckets;
  const std::uint32_t per = L * B;
  DecodeResult res;
  if (s.is_zero()) return res;

  thread_local std::vector<OneSparseCell> cells;
  cells.assign(p.cells(), OneSparseCell{});
  for (const auto& [i, c] : s.nonzero_cells()) cells[i] = c;

  auto subtract = [&](const Coord& x) {
    const std::uint64_t d = field::neg(field::from_signed(x.value));
    const std::uint64_t zp = sd.power(x.index);
    for (std::uint32_t t = 0; t < p.samplers; ++t) {
      const std::uint32_t m = sd.depth(t, x.index, L);
      const auto b = static_cast<std::uint32_t>(sd.bucket_hash[t](x.index, B));
      for (std::uint32_t l = 0; l < m; ++l) cells[t * per + l * B + b].update(x.index, d, zp);
    }
  };

  std::unordered_set<std::uint64_t> seen;
  const std::uint64_t cap = std::uint64_t{c_dense} * std::max<std::uint32_t>(p.k, 1);
  std::vector<Coord> cand;
  for (std::uint32_t t = 0; t < p.samplers && !res.dense; ++t) {
    const std::size_t base = std::size_t{t} * per;
    int deep = -1;
    for (int l = static_cast<int>(L) - 1; l >= 0 && deep < 0; --l) {
      for (std::uint32_t b = 0; b < B; ++b) {
        if (!cells[base + l * B + b].zero()) {
          deep = l;
          break;
        }
      }
    }
    if (deep < 0) continue;
    cand.clear();
    for (std::uint32_t b = 0; b < B; ++b) {
      auto r = one_sparse_decide(cells[base + deep * B + b], sd.z, p.dim);
      if (!r) continue;
      if (sd.depth(t, r->index, L) <= static_cast<std::uint32_t>(deep)) continue;
      if (sd.bucket_hash[t](r->index, B) != b) continue;
      cand.push_back(*r);
    }
    for (const auto& x : cand) {
      if (!seen.insert(x.index).second) {
        res.dense = true;
        break;
      }
      res.coords.push_back(x);
      subtract(x);
    }
    if (res.coords.size() > cap) res.dense = true;
  }
  if (!res.dense) {
    for (const auto& c : cells) {
      if (!c.zero()) {
        res.dense = true;
        break;
      }
    }
  }
  if (res.dense) {
    res.coords.clear();
    return res;
  }
  std::sort(res.coords.begin(), res.coords.end());
  return res;
}

void agm_updates(NodeId v, std::span<const NodeId> neighbours, std::uint32_t n, std::vector<Update>& out) {
  for (NodeId u : neighbours) {
    if (u == v) continue;
    out.push_back({agm_index(v, u, n), +1});
    out.push_back({agm_index(u, v, n), -1});
  }
}

LinearSketch agm_encode_node(NodeId v, std::span<const NodeId> neighbours, std::uint32_t n,
                             const SketchParams& p) {
  std::vector<Update> ups;
  agm_updates(v, neighbours, n, ups);
  return LinearSketch::encode(p, ups);
}

std::vector<std::pair<NodeId, NodeId>> cut_edges(const std::vector<Coord>& coords, std::uint32_t n) {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(coords.size() / 2 + 1);
  for (const auto& c : coords) {
    auto [j, k] = agm_pair(c.index, n);
    out.emplace_back(std::min(j, k), std::max(j, k));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void agm_weighted_updates(NodeId v, std::span<const Incident> incident, std::uint32_t n, std::vector<Update>& out) {
  for (const auto& x : incident) {
    if (x.to == v) continue;
    if (x.w >= kMaxSketchWeight) throw InvalidParams("edge weight too large to sketch: " + std::to_string(x.w));
    const auto mag = static_cast<std::int64_t>(x.w + 1);
    out.push_back({agm_index(v, x.to, n), mag});
    out.push_back({agm_index(x.to, v, n), -mag});
  }
}

std::vector<WeightedEdge> weighted_cut_edges(const std::vector<Coord>& coords, std::uint32_t n) {
  std::vector<WeightedEdge> out;
  out.reserve(coords.size() / 2 + 1);
  for (const auto& c : coords) {
    auto [j, k] = agm_pair(c.index, n);
    const auto mag = static_cast<std::uint64_t>(c.value < 0 ? -c.value : c.value);
    out.push_back(normalized({j, k, mag - 1}));
  }
  out = canonical_edges(std::move(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Update> net_updates(std::vector<Update> updates) {
  std::sort(updates.begin(), updates.end(), [](const Update& a, const Update& b) { return a.index < b.index; });
  std::vector<Update> out;
  for (const auto& u : updates) {
    if (!out.empty() && out.back().index == u.index) out.back().delta += u.delta;
    else out.push_back(u);
  }
  std::erase_if(out, [](const Update& u) { return u.delta == 0; });
  return out;
}

}  // namespace ncc
