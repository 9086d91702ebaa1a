#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <utility>

namespace probcomb {

// Reproducible random source. Only the engine comes from the standard
// library (std::mt19937_64, whose output sequence the standard fixes); all
// derived draws are computed here so results do not depend on the
// standard-library vendor:
//   uniform01()  top 53 bits of one engine output, scaled by 2^-53, in [0,1)
//   normal()     Box-Muller cosine branch over two uniform01() draws, one
//                normal per call, no caching
//   below(n)     rejection sampling on a raw engine output
//   shuffle()    Fisher-Yates from the back using below()
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t limit = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t x = engine_();
      if (x >= limit) return x % n;
    }
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of one (fold, repeat) run: mix64(mix64(mix64(seed) ^ fold) ^ repeat).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t fold, std::uint64_t repeat) {
  return mix64(mix64(mix64(seed) ^ fold) ^ repeat);
}

}  // namespace probcomb
