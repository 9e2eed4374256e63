#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace eprcs {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-style child seed: hash of the parent seed and a list of tags.
/// Streams derived with distinct tag lists are independent for practical
/// purposes and never depend on evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(parent);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t));
  return h;
}

inline Rng make_stream(std::uint64_t parent,
                       std::initializer_list<std::uint64_t> tags) {
  return Rng(derive_seed(parent, tags));
}

// Stage tags for derive_seed.
enum class Stream : std::uint64_t {
  plan = 0x706c616e,
  acquisition = 0x61637175,
  permutation = 0x7065726d,
  rows = 0x726f7773,
  sweep = 0x73776570,
};

constexpr std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace eprcs
