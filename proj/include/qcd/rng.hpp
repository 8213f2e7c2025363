#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace qcd {

// Counter-based random stream (Philox4x32-10, Salmon et al., SC 2011).
//
// A stream is addressed by (seed, stream_id): the seed is the cipher key and
// the stream id occupies the high half of the 128-bit counter, so streams
// with the same seed never overlap. Trial i of a Monte Carlo run draws from
// stream (master_seed, i) and its output is independent of how trials are
// scheduled across threads.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_{static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)} {}

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      block_ = philox_block(block_index_++, stream_, key_);
      pos_ = 0;
    }
    return block_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - next_double();  // (0, 1], keeps the log finite
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    cached_ = radius * std::sin(angle);
    have_cached_ = true;
    return radius * std::cos(angle);
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  // One Philox4x32-10 block: encrypts (counter, stream) under key.
  static std::array<std::uint32_t, 4> philox_block(std::uint64_t block_index,
                                                   std::array<std::uint32_t, 2> stream,
                                                   std::array<std::uint32_t, 2> key) {
    std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(block_index),
                                        static_cast<std::uint32_t>(block_index >> 32), stream[0],
                                        stream[1]};
    for (int round = 0; round < 10; ++round) {
      ctr = philox_round(ctr, key);
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

 private:
  static std::array<std::uint32_t, 4> philox_round(const std::array<std::uint32_t, 4>& ctr,
                                                   const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t prod0 = std::uint64_t{0xD2511F53u} * ctr[0];
    const std::uint64_t prod1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(prod0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(prod0);
    const auto hi1 = static_cast<std::uint32_t>(prod1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(prod1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> stream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 4;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace qcd
