#pragma once

#include <cstdint>
#include <random>

namespace sagin {

using Rng = std::mt19937_64;

/// Derive an independent stream seed from a base seed and a salt (splitmix64 finaliser).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace sagin
