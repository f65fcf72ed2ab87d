#pragma once

#include <cstdint>

namespace advmetrics {

/// Derives an independent stream seed from a global seed (splitmix64 mix).
/// Used so per-sample / per-epoch randomness is reproducible regardless of
/// execution order or thread count.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace advmetrics
