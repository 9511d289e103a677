#pragma once

#include <cstdint>
#include <random>

namespace deconflict {

/// Finalizer of the splitmix64 generator; a good 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed for logical substream `stream` of a run seed. Giving every aircraft
/// its own stream keeps instance generation stable: the draws of aircraft k
/// never depend on how many rejection retries earlier aircraft needed.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed + 0x9E3779B97F4A7C15ull * (stream + 1));
}

/// mt19937_64 with a fixed 53-bit uniform conversion. Both the engine output
/// sequence and the conversion are exactly specified, so streams reproduce
/// bit-for-bit across platforms (std::uniform_real_distribution would not).
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace deconflict
