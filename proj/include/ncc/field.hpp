#pragma once

#include <cstdint>

// Arithmetic over the Mersenne prime field GF(2^61 - 1).
namespace ncc::field {

inline constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

constexpr std::uint64_t reduce(std::uint64_t x) noexcept {
  x = (x & kPrime) + (x >> 61);
  return x >= kPrime ? x - kPrime : x;
}

constexpr std::uint64_t add(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t s = a + b;
  return s >= kPrime ? s - kPrime : s;
}

constexpr std::uint64_t sub(std::uint64_t a, std::uint64_t b) noexcept {
  return a >= b ? a - b : a + kPrime - b;
}

constexpr std::uint64_t neg(std::uint64_t a) noexcept { return a == 0 ? 0 : kPrime - a; }

constexpr std::uint64_t mul(std::uint64_t a, std::uint64_t b) noexcept {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  std::uint64_t lo = static_cast<std::uint64_t>(p) & kPrime;
  std::uint64_t hi = static_cast<std::uint64_t>(p >> 61);
  return reduce(lo + hi);
}

constexpr std::uint64_t pow(std::uint64_t base, std::uint64_t e) noexcept {
  std::uint64_t r = 1;
  base = reduce(base);
  while (e != 0) {
    if (e & 1U) r = mul(r, base);
    base = mul(base, base);
    e >>= 1U;
  }
  return r;
}

constexpr std::uint64_t inverse(std::uint64_t a) noexcept { return pow(a, kPrime - 2); }

/// Embeds a signed integer (|v| < p/2) into the field.
constexpr std::uint64_t from_signed(std::int64_t v) noexcept {
  return v >= 0 ? reduce(static_cast<std::uint64_t>(v))
                : neg(reduce(static_cast<std::uint64_t>(-(v + 1)) + 1));
}

/// Inverse of from_signed: elements above p/2 are read as negatives.
constexpr std::int64_t to_signed(std::uint64_t a) noexcept {
  return a > kPrime / 2 ? -static_cast<std::int64_t>(kPrime - a) : static_cast<std::int64_t>(a);
}

}  // namespace ncc::field
