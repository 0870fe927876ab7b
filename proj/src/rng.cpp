#include "delaysched/rng.hpp"

namespace delaysched {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x5851F42D4C957F2DULL));
}

std::mt19937_64 make_stream(std::uint64_t run_seed, Stream stream) {
  const auto id = static_cast<std::uint64_t>(stream);
  const std::uint64_t s0 = splitmix64(run_seed ^ (id * 0xD1B54A32D192ED03ULL));
  const std::uint64_t s1 = splitmix64(s0 + id);
  std::seed_seq seq{static_cast<std::uint32_t>(s0), static_cast<std::uint32_t>(s0 >> 32),
                    static_cast<std::uint32_t>(s1), static_cast<std::uint32_t>(s1 >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace delaysched
