#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pricing {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent seeds from a base seed.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds a sequence of integers into a seed: h = mix64(h ^ mix64(v)) for each v.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = mix64(base);
  for (auto v : parts) h = mix64(h ^ mix64(v));
  return h;
}

/// Named substreams of a scenario seed. The price stream is isolated so that
/// changing the logging policy never perturbs feature or valuation draws.
enum class Stream : std::uint64_t {
  features = 0x66656174ULL,
  valuations = 0x76616c75ULL,
  prices = 0x70726963ULL,
  test_features = 0x74657374ULL,
  oracle = 0x6f72636cULL,
  solver = 0x736f6c76ULL,
};

inline Rng make_stream(std::uint64_t seed, Stream s) {
  return Rng(derive_seed(seed, {static_cast<std::uint64_t>(s)}));
}

}  // namespace pricing
