#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace linksteal {

using Rng = std::mt19937_64;

constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed for the named stream `stream` (optionally indexed) under `master`.
/// Streams never share state, so changing how much randomness one pipeline
/// stage consumes leaves every other stage untouched.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(master ^ hash_name(stream)) + mix64(index));
}

inline Rng make_rng(std::uint64_t master, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

/// Laplace(0, scale) by inverse CDF.
inline double sample_laplace(Rng& rng, double scale) {
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  double u = uni(rng);
  while (u == -0.5) u = uni(rng);
  const double sign = u < 0 ? -1.0 : 1.0;
  return -scale * sign * std::log1p(-2.0 * std::abs(u));
}

}  // namespace linksteal
