#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace repp {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  Xoshiro256() : Xoshiro256(0) {}
  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  friend bool operator==(const Xoshiro256&, const Xoshiro256&) = default;

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

/// Independent generator for (master seed, stream, substream). Streams never
/// share state, so trial k can be replayed without running trials 0..k-1.
inline Xoshiro256 make_stream(std::uint64_t master, std::uint64_t stream,
                              std::uint64_t substream = 0) {
  std::uint64_t h = master ^ 0x6A09E667F3BCC909ULL;
  std::uint64_t a = splitmix64(h);
  h = a ^ (stream * 0xD1B54A32D192ED03ULL);
  std::uint64_t b = splitmix64(h);
  h = b ^ (substream * 0x8CB92BA72F3D8DD7ULL);
  return Xoshiro256(splitmix64(h));
}

/// Uniform double on [0,1) with 53 random bits.
inline double uniform01(Xoshiro256& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace repp
