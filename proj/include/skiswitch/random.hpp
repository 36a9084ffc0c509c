#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace skiswitch {

using Rng = std::mt19937_64;

/// Stream purposes. Each (master seed, replication, purpose, index) tuple owns
/// one independent generator, so adding replications or SBSs never shifts the
/// draws of existing ones.
namespace stream {
inline constexpr std::uint64_t kTopology = 1;
inline constexpr std::uint64_t kHarvest = 2;
inline constexpr std::uint64_t kRoaDraw = 3;
inline constexpr std::uint64_t kAnalysis = 4;
}  // namespace stream

std::uint64_t splitmix64(std::uint64_t x);

/// Folds a path of tags into a 64-bit seed derived from `master`.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng{derive_seed(master, path)};
}

}  // namespace skiswitch
