#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace semshift {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t basis = 0xcbf29ce484222325ULL) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Per-key seed so that results for one key never depend on the order in
// which other keys are processed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
  return splitmix64(fnv1a64(key, splitmix64(seed)));
}

// Draws `count` distinct elements of `pool` uniformly (partial Fisher-Yates).
// The selection order is the draw order; callers sort if they need to.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool,
                                          std::size_t count, Rng& rng) {
  if (count > pool.size()) count = pool.size();
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace semshift
