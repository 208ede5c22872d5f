#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cfgnn {

using Rng = std::mt19937_64;

/// Derives an independent sub-seed for a named stream from the run seed.
///
/// Every consumer of randomness (split, init, dropout, resampling, power
/// iteration start vectors) draws from its own stream so that adding draws
/// to one stream never shifts another.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  // splitmix64 finalizer
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::string_view stream) {
  return Rng(derive_seed(seed, stream));
}

}  // namespace cfgnn
