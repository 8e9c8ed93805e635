#pragma once

#include <cstdint>
#include <random>

namespace hom {

/// Serial runs the reference loop; parallel distributes shards with OpenMP.
/// Both produce bit-identical results.
enum class Execution { serial, parallel };

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Split rule for sub-streams: seed of shard `index` within `stream`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

}  // namespace hom
