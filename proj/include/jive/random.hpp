#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace jive {

/// Seed for the independent stream `stream` of a master `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Deterministic random stream keyed by (seed, stream).
///
/// The draws are defined here rather than through <random> distributions so
/// that output is identical across standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal variate (Marsaglia polar method).
  double normal();

  /// Fisher-Yates shuffle.
  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

  /// `count` distinct indices drawn uniformly from [0, population), in draw order.
  std::vector<std::int64_t> sample_without_replacement(std::int64_t population,
                                                       std::int64_t count);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace jive
