#include "seqembed/rng.hpp"

namespace seqembed {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream RngStream::derive(std::uint64_t master_seed, RngComponent component,
                            std::uint64_t index) {
  std::uint64_t tag = static_cast<std::uint64_t>(component);
  std::uint64_t seed = splitmix64(splitmix64(master_seed ^ (tag << 32)) + index);
  return RngStream(seed);
}

std::size_t RngStream::uniform_index(std::size_t n) {
  using u128 = unsigned __int128;
  // Lemire's bounded generation; the rejection loop removes modulo bias.
  std::uint64_t x = next_u64();
  u128 m = static_cast<u128>(x) * static_cast<u128>(n);
  std::uint64_t lo = static_cast<std::uint64_t>(m);
  if (lo < n) {
    std::uint64_t threshold = (-static_cast<std::uint64_t>(n)) % n;
    while (lo < threshold) {
      x = next_u64();
      m = static_cast<u128>(x) * static_cast<u128>(n);
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

}  // namespace seqembed
