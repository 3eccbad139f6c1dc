#include "fedac/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fedac {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &hi,
                    std::uint32_t &lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::uint64_t join(std::uint32_t lo, std::uint32_t hi) noexcept {
  return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}

inline std::array<std::uint32_t, 4> block_at(const RngStream &s,
                                             std::uint32_t attempt) noexcept {
  return philox4x32({static_cast<std::uint32_t>(s.counter),
                     static_cast<std::uint32_t>(s.counter >> 32), s.worker_id,
                     attempt},
                    {static_cast<std::uint32_t>(s.seed),
                     static_cast<std::uint32_t>(s.seed >> 32)});
}

inline double unit_open_right(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::array<std::uint32_t, 4> peek_block(const RngStream &stream,
                                        std::uint32_t attempt) noexcept {
  return block_at(stream, attempt);
}

double draw_uniform(RngStream &stream) noexcept {
  const auto b = block_at(stream, 0);
  ++stream.counter;
  return unit_open_right(join(b[0], b[1]));
}

Index draw_index(RngStream &stream, Index n) {
  if (n < 1)
    throw std::invalid_argument("draw_index: n must be positive");
  const auto range = static_cast<std::uint64_t>(n);
  // Lemire's multiply-shift with rejection of the biased low region.
  const std::uint64_t threshold = (0 - range) % range;
  __extension__ using u128 = unsigned __int128;
  for (std::uint32_t attempt = 0;; ++attempt) {
    const auto b = block_at(stream, attempt);
    const u128 product = static_cast<u128>(join(b[0], b[1])) * range;
    if (static_cast<std::uint64_t>(product) >= threshold) {
      ++stream.counter;
      return static_cast<Index>(product >> 64);
    }
  }
}

Vector draw_gaussian(RngStream &stream, Index count) {
  Vector out(count);
  for (Index i = 0; i < count; i += 2) {
    const auto b = block_at(stream, 0);
    ++stream.counter;
    const double u1 = unit_open_right(join(b[0], b[1])) + 0x1.0p-53; // (0, 1]
    const double u2 = unit_open_right(join(b[2], b[3]));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out[i] = r * std::cos(theta);
    if (i + 1 < count)
      out[i + 1] = r * std::sin(theta);
  }
  return out;
}

} // namespace fedac
