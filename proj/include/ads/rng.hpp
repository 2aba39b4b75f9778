#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace ads {

/// SplitMix64 finaliser; used to derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic sub-seed for a numbered stream of a parent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seedable generator whose output sequence does not depend on the standard
/// library implementation (the distributions in <random> do).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Uniform real in [0, 1).
  double uniform();

  /// Uniform random permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

  /// k distinct indices drawn uniformly from 0..n-1, in draw order.
  std::vector<std::size_t> sample(std::size_t n, std::size_t k);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ads
