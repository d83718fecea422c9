#pragma once

#include <cstdint>
#include <random>

namespace onionlabel {

/// splitmix64 finalizer; mixes a base seed with a stream counter so that
/// independent jobs (sweep cells, signals) get decorrelated generators.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(derive_seed(seed, stream)); }

/// Fixed stream identifiers so each consumer of a run seed draws independently.
namespace streams {
inline constexpr std::uint64_t kSolverInit = 1;
inline constexpr std::uint64_t kVoteTies = 2;
inline constexpr std::uint64_t kGenerator = 3;
}  // namespace streams

}  // namespace onionlabel
