#pragma once

#include <cstdint>
#include <random>

namespace drift {

// Seed mixing (splitmix64). Used to derive independent sub-streams from a
// run seed so that components (feature draws, noise, tie-breaking, bootstrap)
// never share state.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
  return mix64(mix64(seed) ^ mix64(stream_id * 0x9e3779b97f4a7c15ULL + 1));
}

// Platform-stable generator: the mt19937_64 engine is fully specified by the
// standard; the floating-point and integer conversions below are explicit so
// results do not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng derive(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(derive_seed(seed, stream_id));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in the open interval (0,1); never returns an exact 0 or 1.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Lemire multiply-shift; deterministic.
  std::uint32_t uniform_int(std::uint32_t n) {
    const std::uint64_t x = next_u64() >> 32;
    return static_cast<std::uint32_t>((x * static_cast<std::uint64_t>(n)) >> 32);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace drift
