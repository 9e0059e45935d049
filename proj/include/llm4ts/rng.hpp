#pragma once

#include <cstdint>
#include <random>

namespace llm4ts {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a base seed and a list of integer coordinates
// (e.g. scenario, eta index, method index, repeat). The derivation depends
// only on the values, never on evaluation order, so concurrently executed
// cells stay reproducible.
template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t base, Parts... parts) {
  std::uint64_t s = splitmix64(base ^ 0x632be59bd9b4e019ULL);
  ((s = splitmix64(s ^ splitmix64(static_cast<std::uint64_t>(parts)))), ...);
  return s;
}

}  // namespace llm4ts
