#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace predalloc {

/// Philox4x32-10 counter-based generator. Output depends only on (key, counter).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

  static Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

  /// Uniform in the open interval (0, 1) from 64 random bits.
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t{hi} << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }
};

/// Independent stream families; occupy the top byte of the first counter word.
enum class StreamTag : std::uint32_t {
  Fading = 1,
  Arrivals = 2,
  Mobility = 3,
  Placement = 4,
  Video = 5,
  Test = 255,
};

/// Sequential uniforms drawn from the Philox block stream addressed by
/// (seed, tag, id, a, b); the fourth counter word advances per block.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, StreamTag tag, std::uint32_t id, std::uint32_t a = 0,
                std::uint32_t b = 0)
      : key_(Philox4x32::key_from_seed(seed)),
        base_{(static_cast<std::uint32_t>(tag) << 24) | (id & 0x00FFFFFFu), a, b, 0} {}

  double uniform() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    Philox4x32::Counter ctr = base_;
    ctr[3] = next_++;
    const auto out = Philox4x32::block(ctr, key_);
    spare_ = Philox4x32::to_unit(out[2], out[3]);
    cached_ = true;
    return Philox4x32::to_unit(out[0], out[1]);
  }

  double exponential(double mean) { return -mean * std::log(uniform()); }

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter base_;
  std::uint32_t next_ = 0;
  double spare_ = 0.0;
  bool cached_ = false;
};

}  // namespace predalloc
