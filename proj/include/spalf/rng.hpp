#ifndef SPALF_RNG_HPP
#define SPALF_RNG_HPP

#include <cstdint>
#include <random>

namespace spalf {

// splitmix64 step; used to derive well-separated seeds from (seed, index, tag).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic per-replicate stream: identical (seed, index, tag) gives an
// identical generator regardless of which worker runs the replicate.
inline std::mt19937_64 replicate_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= index * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL;
  std::uint64_t b = splitmix64(s);
  s ^= tag * 0xd1342543de82ef95ULL + 0x452821e638d01377ULL;
  std::uint64_t c = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace spalf

#endif
