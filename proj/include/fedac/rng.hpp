#pragma once

#include <array>
#include <cstdint>

#include "fedac/types.hpp"

namespace fedac {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream. Every draw is a pure function of
/// (seed, worker_id, counter); the counter is the only mutable part.
///
/// Block layout: key = seed, counter words = {counter lo, counter hi,
/// worker_id, attempt}. Draw costs, in counter increments:
///   draw_uniform           1
///   draw_index             1 (rejection retries vary the attempt word)
///   draw_gaussian(count)   ceil(count / 2)
struct RngStream {
  std::uint64_t seed = 0;
  std::uint32_t worker_id = 0;
  std::uint64_t counter = 0;

  friend bool operator==(const RngStream &, const RngStream &) = default;
};

inline RngStream make_stream(std::uint64_t seed, Index worker_id) {
  return RngStream{seed, static_cast<std::uint32_t>(worker_id), 0};
}

/// 128 random bits of the block at the stream's current counter, without advancing.
std::array<std::uint32_t, 4> peek_block(const RngStream &stream,
                                        std::uint32_t attempt = 0) noexcept;

/// Uniform in [0, 1) with 53 bits of resolution.
double draw_uniform(RngStream &stream) noexcept;

/// Uniform over [0, n), unbiased. Requires n >= 1.
Index draw_index(RngStream &stream, Index n);

/// `count` independent standard normals (Box-Muller, two per block).
Vector draw_gaussian(RngStream &stream, Index count);

} // namespace fedac
