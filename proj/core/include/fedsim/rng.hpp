#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedsim {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Purpose tags for seed derivation. Every stochastic choice in a run draws
/// from a stream keyed by (master seed, tag, round, index), so results do not
/// depend on the order in which clients or reviewers are processed.
enum class SeedStream : std::uint64_t {
  kInit = 1,
  kAdversaries = 2,
  kPartition = 3,
  kClientSelection = 4,
  kLocalTraining = 5,
  kReviewerSelection = 6,
  kReviewSubsample = 7,
  kSurrogateSelection = 8,
  kDataSplit = 9,
  kDataGeneration = 10,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                    std::uint64_t round = 0,
                                    std::uint64_t index = 0) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ round);
  return splitmix64(h ^ index);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace fedsim
