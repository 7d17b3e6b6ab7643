#pragma once

// Counter-based normal variates. A draw is a pure function of
// (base_seed, replication, stream, step), so Monte Carlo replications can run
// in any order or in parallel and still reproduce bit-identically.
//
// The bit generator is Philox4x32-10 (Salmon et al., SC'11).

#include <array>
#include <cmath>
#include <cstdint>

namespace adfgof {

struct Seed {
  std::uint64_t base = 0;
  std::uint64_t replication = 0;

  bool operator==(const Seed&) const = default;
};

/// Independent streams drawn from the same seed.
enum class Stream : std::uint32_t {
  kPathNoise = 0,   // Brownian increments driving a trajectory
  kLimitNoise = 1,  // Wiener paths for limit-side Monte Carlo
  kCalibration = 2,
  kAuxiliary = 3,
};

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
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

/// Uniform on (-1, 1) from 32 random bits (never exactly 0 or +-1).
inline double to_symmetric_unit(std::uint32_t bits) {
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-31 - 1.0;
}

}  // namespace detail

/// Standard normals for one (seed, stream): draw(i) is the i-th variate.
class NormalStream {
 public:
  NormalStream(Seed seed, Stream stream)
      : key_{static_cast<std::uint32_t>(seed.base), static_cast<std::uint32_t>(seed.base >> 32)},
        rep_lo_(static_cast<std::uint32_t>(seed.replication)),
        rep_hi_(static_cast<std::uint32_t>(seed.replication >> 32)),
        stream_(static_cast<std::uint32_t>(stream)) {}

  /// Variates 4*block .. 4*block+3, by Marsaglia's polar method. A Philox call
  /// yields two candidate points in the square; rejected ones are replaced from
  /// further calls keyed by an attempt counter, so the output stays a pure
  /// function of (seed, stream, block).
  [[nodiscard]] std::array<double, 4> quad(std::uint64_t block) const {
    const auto block_lo = static_cast<std::uint32_t>(block);
    const auto block_hi = static_cast<std::uint32_t>(block >> 32);
    std::array<double, 4> out{};
    int filled = 0;
    for (std::uint32_t attempt = 0; filled < 4; ++attempt) {
      // counter word 3: stream id (bits 0-7), high block bits (8-23), attempt (24-31)
      const std::array<std::uint32_t, 4> ctr{block_lo, rep_lo_, rep_hi_,
                                             stream_ ^ (block_hi << 8) ^ (attempt << 24)};
      const auto r = detail::philox4x32_10(ctr, key_);
      for (int c = 0; c < 4 && filled < 4; c += 2) {
        const double v1 = detail::to_symmetric_unit(r[c]);
        const double v2 = detail::to_symmetric_unit(r[c + 1]);
        const double s = v1 * v1 + v2 * v2;
        if (s < 1.0) {
          const double f = std::sqrt(-2.0 * std::log(s) / s);
          out[filled] = v1 * f;
          out[filled + 1] = v2 * f;
          filled += 2;
        }
      }
    }
    return out;
  }

  [[nodiscard]] double draw(std::uint64_t index) const { return quad(index / 4)[index % 4]; }

  /// Fills `out` with variates 0..out.size()-1.
  template <class Container>
  void fill(Container& out) const {
    const std::size_t n = out.size();
    std::size_t i = 0;
    for (std::uint64_t block = 0; i < n; ++block) {
      const auto z = quad(block);
      for (int k = 0; k < 4 && i < n; ++k) out[i++] = z[k];
    }
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t rep_lo_;
  std::uint32_t rep_hi_;
  std::uint32_t stream_;
};

}  // namespace adfgof
