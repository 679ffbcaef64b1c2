#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace proxident {

/// Counter-based generator: output n is a keyed hash of (key, n).
///
/// Any stream can be reproduced from its key alone, and `derive` gives
/// independent child streams (one per search candidate, restart, ...).
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return mix(key_, counter_++); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Key for an independent child stream.
  static std::uint64_t derive(std::uint64_t key, std::uint64_t stream) noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal (Box-Muller, no cached state).
  double normal() noexcept;
  /// Uniform point on the (n-1)-simplex.
  std::vector<double> simplex(std::size_t n);

 private:
  static std::uint64_t mix(std::uint64_t key, std::uint64_t counter) noexcept;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace proxident
