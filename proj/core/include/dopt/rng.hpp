#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>

namespace dopt {

/// Engine used throughout; boost's distributions over it are bit-reproducible
/// across standard libraries.
using Rng = boost::random::mt19937_64;

/// SplitMix64 finalizer; decorrelates nearby seeds before they reach the engine.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-node sampling stream: seeded from seed XOR node index.
inline Rng node_stream(std::uint64_t seed, std::size_t node) {
  return Rng(mix_seed(seed ^ static_cast<std::uint64_t>(node)));
}

/// Network-wide stream (shared coins such as zeta_t in D-NSS-VR).
inline Rng global_stream(std::uint64_t seed) { return Rng(mix_seed(seed ^ 0xD1B54A32D192ED03ULL) + 1); }

/// Stream used only to pick the reported output iterate.
inline Rng output_stream(std::uint64_t seed) { return Rng(mix_seed(seed ^ 0x8CB92BA72F3D8DD7ULL) + 2); }

}  // namespace dopt
