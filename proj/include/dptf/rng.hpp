#pragma once
// Seeded random engine: xoshiro256++ state seeded through splitmix64.
// Generators for individual draw sites are derived from a (seed, path) key,
// so a draw never depends on thread scheduling or loop order. Parallel and
// serial kernel variants therefore produce identical chains.

#include <array>
#include <cstdint>
#include <initializer_list>

namespace dptf {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s += kGolden;
      word = mix64(s);
    }
  }

  // Generator for one draw site. Path order is significant; distinct paths
  // give statistically independent streams.
  static Rng keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t k = mix64(seed + kGolden);
    for (std::uint64_t e : path) {
      k = mix64(k + kGolden + e);
    }
    Rng r;
    r.reseed(k);
    return r;
  }

  std::uint64_t next() {
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

  // Uniform on (0,1), both endpoints excluded.
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_;
};

}  // namespace dptf
