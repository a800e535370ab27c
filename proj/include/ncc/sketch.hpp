#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ncc/engine.hpp"
#include "ncc/errors.hpp"
#include "ncc/field.hpp"
#include "ncc/graph.hpp"

namespace ncc {

/// Degree-(k-1) polynomial over GF(2^61 - 1); k-wise independent.
class KWiseHash {
 public:
  KWiseHash() = default;
  KWiseHash(std::uint32_t k, std::uint64_t seed);
  explicit KWiseHash(std::vector<std::uint64_t> coeffs);

  /// Horner evaluation, a field element.
  std::uint64_t field(std::uint64_t x) const noexcept {
    x = field::reduce(x);
    std::uint64_t acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = field::add(field::mul(acc, x), *it);
    return acc;
  }
  std::uint64_t operator()(std::uint64_t x, std::uint64_t range) const noexcept { return field(x) % range; }

  std::uint32_t k() const noexcept { return static_cast<std::uint32_t>(coeffs_.size()); }
  const std::vector<std::uint64_t>& coeffs() const noexcept { return coeffs_; }
  bool operator==(const KWiseHash&) const = default;

 private:
  std::vector<std::uint64_t> coeffs_;
};

inline std::uint64_t kwise_eval(const KWiseHash& h, std::uint64_t x, std::uint64_t range) { return h(x, range); }

/// (sum of values, index-weighted sum, fingerprint) over the field.
struct OneSparseCell {
  std::uint64_t phi = 0;
  std::uint64_t iota = 0;
  std::uint64_t tau = 0;

  bool zero() const noexcept { return phi == 0 && iota == 0 && tau == 0; }
  void update(std::uint64_t index, std::uint64_t delta, std::uint64_t z_pow) noexcept {
    phi = field::add(phi, delta);
    iota = field::add(iota, field::mul(field::reduce(index), delta));
    tau = field::add(tau, field::mul(delta, z_pow));
  }
  OneSparseCell& operator+=(const OneSparseCell& o) noexcept {
    phi = field::add(phi, o.phi);
    iota = field::add(iota, o.iota);
    tau = field::add(tau, o.tau);
    return *this;
  }
  bool operator==(const OneSparseCell&) const = default;
};

struct Coord {
  std::uint64_t index = 0;
  std::int64_t value = 0;
  bool operator==(const Coord&) const = default;
  auto operator<=>(const Coord&) const = default;
};

/// Exact recovery of a 1-sparse vector over [0, dim); nullopt otherwise
/// (zero vector included).
std::optional<Coord> one_sparse_decide(const OneSparseCell& cell, std::uint64_t z, std::uint64_t dim);

struct SketchParams {
  std::uint64_t dim = 0;        // N
  std::uint32_t k = 0;          // recovery target; 0 for a plain sampler
  std::uint32_t samplers = 1;
  std::uint32_t levels = 1;
  std::uint32_t buckets = 4;
  std::uint32_t level_degree = 8;
  std::uint32_t bucket_degree = 2;
  std::uint64_t seed = 0;

  std::uint64_t cells() const noexcept { return std::uint64_t{samplers} * levels * buckets; }
  /// Random bits needed to derive every hash of the structure.
  std::uint64_t seed_bits() const noexcept {
    return (std::uint64_t{samplers} * (level_degree + bucket_degree) + 1) * 61;
  }
  bool operator==(const SketchParams&) const = default;
};

/// One sampler, ceil(log2 N) + 1 nested levels.
SketchParams l0_params(std::uint64_t dim, std::uint64_t seed);
/// c_s (k + ceil(log2 N)) samplers of ceil(log2 2k) + 1 levels each.
SketchParams ksparse_params(std::uint64_t dim, std::uint32_t k, std::uint64_t seed, std::uint32_t c_s = 4);

/// Hash functions and fingerprint base derived from SketchParams::seed.
struct SketchSeeds {
  explicit SketchSeeds(const SketchParams& p);
  std::vector<KWiseHash> level_hash;
  std::vector<KWiseHash> bucket_hash;
  std::uint64_t z = 0;

  std::uint64_t power(std::uint64_t index) const noexcept { return field::pow(z, index); }
  /// Number of levels containing `index` in sampler s (at least 1).
  std::uint32_t depth(std::uint32_t s, std::uint64_t index, std::uint32_t levels) const noexcept {
    const std::uint64_t h = level_hash[s].field(index);
    std::uint32_t l = 1;
    while (l < levels && h < (field::kPrime >> l)) ++l;
    return l;
  }
};

std::shared_ptr<const SketchSeeds> sketch_seeds(const SketchParams& p);

inline constexpr std::uint64_t kMaxSketchWeight = std::uint64_t{1} << 59;

struct Update {
  std::uint64_t index = 0;
  std::int64_t delta = 0;
};

/// Linear sketch made of one-sparse cells, stored sparsely (all-zero cells
/// are dropped). Serves as the L0 sampler and as k-sparse recovery.
class LinearSketch {
 public:
  LinearSketch() = default;
  explicit LinearSketch(const SketchParams& p);

  static LinearSketch encode(const SketchParams& p, std::span<const Update> updates);

  void apply(std::span<const Update> updates);
  void update(std::uint64_t index, std::int64_t delta) {
    const Update u{index, delta};
    apply(std::span<const Update>(&u, 1));
  }

  LinearSketch& operator+=(const LinearSketch& o);
  LinearSketch& operator-=(const LinearSketch& o);
  friend LinearSketch operator+(LinearSketch a, const LinearSketch& b) { return a += b; }
  LinearSketch operator-() const;

  bool is_zero() const noexcept { return cells_.empty(); }
  const SketchParams& params() const noexcept { return params_; }
  const SketchSeeds& seeds() const noexcept { return *seeds_; }
  const std::vector<std::pair<std::uint32_t, OneSparseCell>>& nonzero_cells() const noexcept { return cells_; }

  /// Size of the full (dense) structure in bits: 3 field elements per cell.
  std::uint64_t bits() const noexcept { return params_.cells() * 3 * 61; }

  std::vector<std::uint8_t> serialize() const;
  static LinearSketch deserialize(std::span<const std::uint8_t> bytes);

  bool operator==(const LinearSketch& o) const { return params_ == o.params_ && cells_ == o.cells_; }

 private:
  SketchParams params_;
  std::shared_ptr<const SketchSeeds> seeds_;
  std::vector<std::pair<std::uint32_t, OneSparseCell>> cells_;  // sorted by cell index
};

using L0Sampler = LinearSketch;
using KSparseRecovery = LinearSketch;

/// A random nonzero coordinate, or nullopt on failure or for the zero vector.
std::optional<Coord> l0_sample(const LinearSketch& s);

struct DecodeResult {
  bool dense = false;
  std::vector<Coord> coords;  // sorted by index
};

/// Recovers every nonzero coordinate when the support is at most k; DENSE
/// when more than c_dense * k are found or a residual remains.
DecodeResult ksparse_decode(const LinearSketch& s, std::uint32_t c_dense = 2);

inline LinearSketch ksparse_encode(const SketchParams& p, std::span<const Update> updates) {
  return LinearSketch::encode(p, updates);
}
inline LinearSketch ksparse_add(const LinearSketch& a, const LinearSketch& b) { return a + b; }

// AGM encoding over coordinates <j, k>, index (j - 1) n + (k - 1).

constexpr std::uint64_t agm_index(NodeId j, NodeId k, std::uint32_t n) noexcept {
  return std::uint64_t{j - 1} * n + (k - 1);
}
constexpr std::pair<NodeId, NodeId> agm_pair(std::uint64_t index, std::uint32_t n) noexcept {
  return {static_cast<NodeId>(index / n + 1), static_cast<NodeId>(index % n + 1)};
}

/// Node v contributes +1 at <v, u> and -1 at <u, v> for every neighbour u.
void agm_updates(NodeId v, std::span<const NodeId> neighbours, std::uint32_t n, std::vector<Update>& out);

LinearSketch agm_encode_node(NodeId v, std::span<const NodeId> neighbours, std::uint32_t n,
                             const SketchParams& p);

/// Edges of the cut encoded by decoded AGM coordinates, as (min, max) pairs.
std::vector<std::pair<NodeId, NodeId>> cut_edges(const std::vector<Coord>& coords, std::uint32_t n);

/// Same rule with magnitude w + 1 instead of 1, so decoded edges keep their
/// weights. Weights must stay below 2^59.
void agm_weighted_updates(NodeId v, std::span<const Incident> incident, std::uint32_t n, std::vector<Update>& out);
std::vector<WeightedEdge> weighted_cut_edges(const std::vector<Coord>& coords, std::uint32_t n);

/// Sums updates per index and drops zeros; encoding the result is identical.
std::vector<Update> net_updates(std::vector<Update> updates);

}  // namespace ncc
