#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hazardsim::rng {

// Counter-based stream derivation. Every stochastic quantity in the library is
// generated from an engine keyed by (seed, counter), so results never depend
// on how work is split across threads.

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t seed, std::uint64_t counter) noexcept {
  return mix64(mix64(seed) ^ (counter + 0x632be59bd9b4e019ULL));
}

/// FNV-1a, stable across platforms (unlike std::hash).
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t counter) {
  return std::mt19937_64(combine(seed, counter));
}

/// Seed of the stream owned by a named entity (a scenario, a fold, ...).
constexpr std::uint64_t derive(std::uint64_t seed, std::string_view key) noexcept {
  return combine(seed, hash_string(key));
}

}  // namespace hazardsim::rng
