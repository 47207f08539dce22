#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace dronesched {

// Deterministic 64-bit generator (splitmix64). Used instead of <random>
// engines so that generated instances and restart permutations are
// bit-identical across platforms and standard library versions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased uniform draw from [0, bound). bound must be >= 1.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % bound;
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  // Independent substream for (seed, index); distinct indices give
  // uncorrelated sequences while staying reproducible.
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 outer(seed);
    return SplitMix64(outer.next() + 0x9e3779b97f4a7c15ULL * index);
  }

 private:
  std::uint64_t state_;
};

}  // namespace dronesched
