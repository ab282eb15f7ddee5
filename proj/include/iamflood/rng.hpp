#pragma once

#include <cstdint>

namespace iamflood {

/// SplitMix64 finalizer. Used both as a generator step and to derive
/// independent streams from integer keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stream key for an ordered pair of integers.
constexpr std::uint64_t stream_key(std::uint64_t a, std::uint64_t b) noexcept
{
  return mix64(mix64(a) ^ (b * 0xD1B54A32D192ED03ULL));
}

/// Maps 64 random bits to a double in [0, 1) with 53 bits of precision.
constexpr double to_unit(std::uint64_t bits) noexcept
{
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Small deterministic generator (SplitMix64). Identical output on every
/// platform, which the ledgers' byte-for-byte reproducibility relies on.
class SplitMix64 {
public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept
  {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr double uniform() noexcept { return to_unit(next()); }

  /// Uniform integer in [0, n). Uses rejection to avoid modulo bias.
  constexpr std::uint64_t below(std::uint64_t n) noexcept
  {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

private:
  std::uint64_t state_;
};

} // namespace iamflood
