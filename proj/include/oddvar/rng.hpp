#pragma once

// Counter-based normal variates: every (seed, path, step) triple maps to a
// fixed standard normal, independent of how paths are spread over workers.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace oddvar::rng {

/// Philox4x32-10 (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// Uniform in (0, 1) from 53 random bits; never returns 0.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return (static_cast<double>(bits & ((std::uint64_t{1} << 53) - 1)) + 0.5) * 0x1.0p-53;
}

/// Two standard normals for the counter (path, pair) under `seed`
/// (Box-Muller on one Philox block).
inline std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t path, std::uint64_t pair) {
  const auto out = philox4x32(
      {static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(pair >> 32), static_cast<std::uint32_t>(path),
       static_cast<std::uint32_t>(path >> 32)},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const double u1 = to_open_unit(out[0], out[1]);
  const double u2 = to_open_unit(out[2], out[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Standard normal attached to (seed, path, step).
inline double normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
  return normal_pair(seed, path, step >> 1)[step & 1];
}

/// Fill out[j] = normal(seed, path, first + j).
template <class Span>
void fill_normals(std::uint64_t seed, std::uint64_t path, std::uint64_t first, Span&& out) {
  const std::size_t n = out.size();
  std::size_t j = 0;
  std::uint64_t step = first;
  if (n > 0 && (step & 1)) {
    out[j++] = normal(seed, path, step++);
  }
  for (; j + 1 < n; j += 2, step += 2) {
    const auto z = normal_pair(seed, path, step >> 1);
    out[j] = z[0];
    out[j + 1] = z[1];
  }
  if (j < n) out[j] = normal(seed, path, step);
}

/// Independent stream id for auxiliary Monte Carlo (oracles, condition
/// checks) so they never share counters with path generation.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace oddvar::rng
