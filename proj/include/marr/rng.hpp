#pragma once
// Deterministic randomness helpers. Every random choice in the toolkit flows
// through an explicit 64-bit seed; nothing reads a clock or OS entropy.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace marr {

// splitmix64 finalizer, used for seed mixing.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derive an independent stream seed from a master seed and a label
// (FNV-1a over the label, then mixed). Order-independent across questions.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return mix64(seed ^ h);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream));
}

// Uniform double in (0, 1). Hand-rolled so results do not depend on the
// standard library's unspecified distribution algorithms.
inline double next_double(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

// Uniform integer in [0, n), rejection-sampled.
inline std::uint64_t next_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = n == 0 ? 0 : ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Standard Gumbel(0, 1) via inverse CDF.
inline double next_gumbel(std::mt19937_64& rng) {
  return -std::log(-std::log(next_double(rng)));
}

// Fisher-Yates shuffle with our own index draws.
template <typename T>
void shuffle_in_place(std::vector<T>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(next_below(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace marr
