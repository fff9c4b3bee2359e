#pragma once
// Seed fan-out. Every consumer draws from its own mt19937_64 seeded with
// derive_seed(seed, stream): two rounds of splitmix64 over (seed, stream).

#include <cstdint>
#include <random>

namespace prigp {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xd1342543de82ef95ULL + 1));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(derive_seed(seed, stream)); }

// Stream ids.
inline constexpr std::uint64_t kStreamTraining = 1;
inline constexpr std::uint64_t kStreamQueries = 2;
inline constexpr std::uint64_t kStreamMeasurement = 3;
inline constexpr std::uint64_t kStreamInitialState = 4;

}  // namespace prigp
