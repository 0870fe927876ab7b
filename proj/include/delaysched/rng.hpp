#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace delaysched {

/// Generator name recorded alongside every simulation result.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64 streams seeded by splitmix64";

/// One step of the SplitMix64 finalizer; a bijective 64-bit mix.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of replicate `index` derived from a master seed.
std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t index);

enum class Stream : std::uint64_t {
  kClass1Arrivals = 1,
  kClass2Arrivals = 2,
  kPolicy = 3,
  kClass1Work = 4,
  kClass2Work = 5,
};

/// Independent engine for one named stream of a run. Streams never share
/// state, so drawing more from one (e.g. a randomized policy) leaves the
/// others' sample paths unchanged.
std::mt19937_64 make_stream(std::uint64_t run_seed, Stream stream);

}  // namespace delaysched
