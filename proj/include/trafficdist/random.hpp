#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace trafficdist {

// 64-bit FNV-1a. Stable across platforms; used for content ids and for
// deriving per-context seeds.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// SplitMix64 finalizer over the pair, for deriving independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;
std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt) noexcept;

// Seeded generator whose draws are identical on every standard library.
// std::uniform_int_distribution and std::shuffle are implementation-defined,
// so index draws use rejection sampling on the raw mt19937_64 stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, n). n must be > 0.
  std::size_t index(std::size_t n);

  // Uniform in [0, 1).
  double unit();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  // Identity permutation of [0, n) shuffled.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace trafficdist
