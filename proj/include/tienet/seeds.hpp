#pragma once

#include <cstdint>
#include <random>

namespace tienet {

/// SplitMix64 finaliser. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Subseed for item `index` of stream `stream` under `master`:
///   mix64(mix64(master ^ mix64(stream)) + index)
/// Serial and parallel callers that agree on (master, stream, index) get the
/// same value.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) {
  return mix64(mix64(master ^ mix64(stream)) + index);
}

namespace streams {
inline constexpr std::uint64_t train = 0x7472;     // "tr"
inline constexpr std::uint64_t test = 0x7465;      // "te"
inline constexpr std::uint64_t noise = 0x6e6f;     // "no"
inline constexpr std::uint64_t reject = 0x726a;    // "rj"
inline constexpr std::uint64_t shuffle = 0x7368;   // "sh"
}  // namespace streams

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace tienet
