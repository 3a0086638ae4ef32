#pragma once

#include <cstdint>
#include <random>

namespace mwdet {

// SplitMix64 mixing step. Used to derive independent, well-separated seed
// streams from a base seed; the streams themselves are mt19937_64.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic stream seed for (base seed, stream index, salt). Trajectory k
// of a run uses salt 0; auxiliary draws (e.g. detector thinning) use salt > 0
// so they never consume numbers from the dynamics stream.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0) {
  std::uint64_t s = seed;
  (void)splitmix64(s);
  s ^= 0x9E3779B97F4A7C15ull * (index + 1);
  (void)splitmix64(s);
  s ^= 0xC2B2AE3D27D4EB4Full * (salt + 1);
  return splitmix64(s);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0) {
  return std::mt19937_64(derive_stream(seed, index, salt));
}

// Uniform double in [0, 1) from the top 53 bits. mt19937_64 is fully specified
// by the standard, so this is bit-reproducible across platforms (the standard
// distributions are not).
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mwdet
