#pragma once

// Counter-based normal variates: Philox4x32-10 (Salmon et al., SC'11) keyed
// by the 64-bit seed, counter = (block index, stream index), followed by
// Box-Muller. Variate i of a stream depends only on (seed, stream, i), so
// paths can be simulated in any order or in parallel with identical results.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ivri/errors.hpp"

namespace ivri {

struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

namespace detail {

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace detail

using PhiloxBlock = std::array<std::uint32_t, 4>;

inline PhiloxBlock philox4x32_10(PhiloxBlock ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    detail::mulhilo32(kM0, ctr[0], hi0, lo0);
    detail::mulhilo32(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Standard normal variates indexed by position within one (seed, stream).
class NormalStream {
 public:
  explicit NormalStream(RngSeed s) : seed_(s) {}

  double operator()(std::uint64_t index) {
    const std::uint64_t block = index >> 1;
    if (block != cached_block_) fill(block);
    return pair_[index & 1u];
  }

  RngSeed seed() const noexcept { return seed_; }

 private:
  void fill(std::uint64_t block) {
    const PhiloxBlock ctr = {static_cast<std::uint32_t>(block),
                             static_cast<std::uint32_t>(block >> 32),
                             static_cast<std::uint32_t>(seed_.stream),
                             static_cast<std::uint32_t>(seed_.stream >> 32)};
    const auto r = philox4x32_10(
        ctr, {static_cast<std::uint32_t>(seed_.seed), static_cast<std::uint32_t>(seed_.seed >> 32)});
    constexpr double kTwoPow53 = 9007199254740992.0;
    // 53-bit uniforms in (0, 1)
    const auto u53 = [](std::uint32_t hi, std::uint32_t lo) {
      return ((((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11) + 0.5) / kTwoPow53;
    };
    const double u1 = u53(r[0], r[1]);
    const double u2 = u53(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    pair_ = {radius * std::cos(angle), radius * std::sin(angle)};
    cached_block_ = block;
  }

  RngSeed seed_;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::array<double, 2> pair_{};
};

/// i.i.d. N(0, dt) increments: element i is sqrt(dt) * Z_i of the stream.
inline std::vector<double> brownian_increments(RngSeed seed, std::size_t n_steps, double dt) {
  if (n_steps < 1) throw DomainError("brownian_increments: n_steps must be >= 1");
  if (!(dt > 0.0)) throw DomainError("brownian_increments: dt must be > 0");
  NormalStream z(seed);
  const double s = std::sqrt(dt);
  std::vector<double> out(n_steps);
  for (std::size_t i = 0; i < n_steps; ++i) out[i] = s * z(i);
  return out;
}

}  // namespace ivri
