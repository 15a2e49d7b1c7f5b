#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace chaos_anneal::rng {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// A 64-bit key and a 128-bit counter map to four independent 32-bit words.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) noexcept {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// Random stream addressed by (seed, stream id); draws are addressed by (step, slot)
/// so any trajectory or any step can be regenerated in isolation.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint32_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::array<std::uint32_t, 4> block(std::uint64_t step, std::uint32_t slot) const noexcept {
    return philox4x32({slot, static_cast<std::uint32_t>(step),
                       static_cast<std::uint32_t>(step >> 32), stream_},
                      key_);
  }

  /// Two uniforms in (0, 1].
  std::array<double, 2> uniform_pair(std::uint64_t step, std::uint32_t slot) const noexcept {
    const auto w = block(step, slot);
    return {to_unit(w[0], w[1]), to_unit(w[2], w[3])};
  }

  double uniform(std::uint64_t step, std::uint32_t slot) const noexcept {
    return uniform_pair(step, slot)[0];
  }

  /// Two independent standard normals (Marsaglia polar method). Candidates come from
  /// block (step, slot), then (step, slot + k * 2^16) on the rare full rejection.
  std::array<double, 2> normal_pair(std::uint64_t step, std::uint32_t slot) const noexcept {
    for (std::uint32_t attempt = 0;; ++attempt) {
      const auto w = block(step, slot + (attempt << 16));
      for (int half = 0; half < 2; ++half) {
        const double u = to_signed_unit(w[2 * half]);
        const double v = to_signed_unit(w[2 * half + 1]);
        const double s = u * u + v * v;
        if (s < 1.0 && s > 0.0) {
          const double f = std::sqrt(-2.0 * std::log(s) / s);
          return {u * f, v * f};
        }
      }
    }
  }

  /// Four independent standard normals from the same candidate sequence as normal_pair.
  std::array<double, 4> normal_quad(std::uint64_t step, std::uint32_t slot) const noexcept {
    std::array<double, 4> out{};
    int filled = 0;
    for (std::uint32_t attempt = 0;; ++attempt) {
      const auto w = block(step, slot + (attempt << 16));
      for (int half = 0; half < 2; ++half) {
        const double u = to_signed_unit(w[2 * half]);
        const double v = to_signed_unit(w[2 * half + 1]);
        const double s = u * u + v * v;
        if (s < 1.0 && s > 0.0) {
          const double f = std::sqrt(-2.0 * std::log(s) / s);
          out[filled++] = u * f;
          out[filled++] = v * f;
          if (filled == 4) return out;
        }
      }
    }
  }

 private:
  // (-1, 1), symmetric about 0
  static double to_signed_unit(std::uint32_t w) noexcept {
    return (static_cast<double>(w) + 0.5) * 0x1.0p-31 - 1.0;
  }

  static double to_unit(std::uint32_t lo, std::uint32_t hi) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
};

}  // namespace chaos_anneal::rng
