#pragma once

#include <cstdint>
#include <random>

namespace hlm {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Purpose tags for derived streams. Values are part of the reproducibility
// contract; append, never renumber.
enum class Stream : std::uint64_t {
  QInit = 1,
  Train = 2,
  Eval = 3,
  Study = 4,
};

// Per-episode substreams. Each episode gets one seed per role so that two
// policies evaluated on the same episode index see the same initial state and
// the same environment draws.
enum class Role : std::uint64_t {
  Initial = 1,
  Environment = 2,
  Estimation = 3,
  Policy = 4,
};

// seed = mix(mix(mix(root ^ stream) ^ index) ^ role)
constexpr std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t index,
                                    Role role = Role::Initial) {
  std::uint64_t s = mix64(root ^ (static_cast<std::uint64_t>(stream) << 56));
  s = mix64(s ^ index);
  return mix64(s ^ static_cast<std::uint64_t>(role));
}

inline Rng make_rng(std::uint64_t root, Stream stream, std::uint64_t index, Role role) {
  return Rng(derive_seed(root, stream, index, role));
}

// Uniform draw on [0, 1); 53 random bits, independent of the standard
// library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace hlm
