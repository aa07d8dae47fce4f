#ifndef QOED_RNG_HPP_
#define QOED_RNG_HPP_

#include <cstdint>
#include <random>

namespace qoed {

using Rng = std::mt19937_64;

namespace detail {
// splitmix64, the usual seed scrambler.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Independent, reproducible stream for (seed, stream). Concurrent workers
// each take their own stream id; no stream shares state with another.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(detail::splitmix64(detail::splitmix64(seed) ^ stream));
}

// Child stream derived from a parent generator. Advances the parent once.
inline Rng split_rng(Rng& parent) {
  return Rng(detail::splitmix64(parent()));
}

}  // namespace qoed

#endif  // QOED_RNG_HPP_
