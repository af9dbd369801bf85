#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace onebit {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a base seed with a tuple of stream coordinates into an independent
/// seed. Used for every (sample, snr, epoch, ...) generator so results do not
/// depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix64(base);
  for (auto c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::uint64_t snr_key(double snr_db) { return std::bit_cast<std::uint64_t>(snr_db); }

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> coords) {
  return Rng(derive_seed(base, coords));
}

// Stream tags keep unrelated consumers of the same base seed apart.
namespace stream {
inline constexpr std::uint64_t kChannel = 0x43484e;
inline constexpr std::uint64_t kNoise = 0x4e4f49;
inline constexpr std::uint64_t kInit = 0x494e49;
inline constexpr std::uint64_t kShuffle = 0x534855;
}  // namespace stream

}  // namespace onebit
