#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace spatfun {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Mixes two 64-bit words into one, splitmix-style. Used to derive
/// substream keys from (parent key, child index) pairs.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// xoshiro256++ (Blackman & Vigna). Small, fast, and fully deterministic
/// across platforms, which the seeded-reproducibility contract needs.
class Xoshiro256pp {
public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_) w = splitmix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

/// Uniform double in [0, 1).
inline double uniform01(Xoshiro256pp& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// One standard normal draw via Box-Muller. Always consumes exactly two
/// uniforms, so stream consumption is independent of the values drawn.
inline double normal_draw(Xoshiro256pp& g) {
  const double u1 = 1.0 - uniform01(g);  // (0, 1]
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

/// Counter-based substream derivation. A master seed is the root; child(i)
/// produces an independent stream for any index, so per-(replicate, score)
/// streams do not depend on evaluation order or thread count.
class StreamKey {
public:
  explicit StreamKey(std::uint64_t master_seed)
      : key_(mix64(0x5fa7u, master_seed)) {}

  StreamKey child(std::uint64_t index) const {
    return StreamKey(mix64(key_, index), raw_tag{});
  }

  Xoshiro256pp engine() const { return Xoshiro256pp(key_); }

  std::uint64_t value() const { return key_; }

private:
  struct raw_tag {};
  StreamKey(std::uint64_t raw, raw_tag) : key_(raw) {}
  std::uint64_t key_;
};

}  // namespace spatfun
