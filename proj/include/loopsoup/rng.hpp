#pragma once

#include <cstdint>
#include <random>

namespace loopsoup {

using Rng = std::mt19937_64;

/// splitmix64 finalizer: a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of replica `index` under master seed `master`, for stream `stream`
/// (distinct components of one replica use distinct streams).
constexpr std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index,
                                     std::uint64_t stream = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(replica_seed(master, index, stream)),
                    static_cast<std::uint32_t>(replica_seed(master, index, stream) >> 32)};
  return Rng(seq);
}

}  // namespace loopsoup
