#pragma once

// Deterministic xoshiro256++ generator with splitmix64 seeding.
// Results are identical on every platform, which the run manifests rely on;
// std::uniform_* distributions are implementation-defined and not used here.

#include <array>
#include <cstdint>

namespace qising {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64_next(s);
  }

  // Independent stream m of a master seed; one stream per trajectory so that
  // results do not depend on execution order.
  static Rng for_stream(std::uint64_t master_seed, std::uint64_t stream) {
    std::uint64_t s = master_seed;
    std::uint64_t a = splitmix64_next(s);
    std::uint64_t b = stream;
    std::uint64_t mixed = a ^ splitmix64_next(b);
    return Rng(mixed + 0x9E3779B97F4A7C15ULL * stream);
  }

  std::uint64_t next_u64() {
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

  // Uniform in [0,1), 53 significant bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0,n) by 64x64->128 multiply-shift (Lemire); slight
  // nonuniformity of order 2^-64 is irrelevant at our sample sizes.
  std::uint32_t bounded(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_;
};

}  // namespace qising
