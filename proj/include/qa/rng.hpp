#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace qa {

/// Seeded random source with explicit sampling algorithms so that outputs are
/// identical across standard library implementations (std::uniform_int_distribution
/// is not portable bit-for-bit).
class rng {
 public:
  explicit rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform in [0, n) by rejection sampling; n must be > 0.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return static_cast<std::size_t>(r % bound);
    }
  }

  /// Fisher-Yates with the portable sampler above.
  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace qa
