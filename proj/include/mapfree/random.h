#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mapfree {

// Seeded random source. Only the raw mt19937_64 stream is used; bounded
// integers and normals are derived here so sequences are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform in [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t UniformIndex(std::uint64_t n);

  // Standard normal via Box-Muller (one value per call, no caching).
  double Normal();

 private:
  std::mt19937_64 engine_;
};

// Stable 64-bit mixing used to derive per-query seeds.
std::uint64_t SplitMix64(std::uint64_t x);
std::uint64_t HashString(std::string_view s);
std::uint64_t DeriveSeed(std::uint64_t global_seed, std::string_view scene_id,
                         std::string_view query_id);

}  // namespace mapfree
