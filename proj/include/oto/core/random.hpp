#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace oto {

/// Seedable 64-bit generator used for every stochastic choice in the project.
///
/// The engine is std::mt19937_64 (fully specified by the C++ standard). The
/// std distributions are implementation-defined, so values are derived from
/// raw 64-bit draws instead:
///   - uniform_index(n): rejection sampling on the top of the 64-bit range,
///     then `x % n`;
///   - uniform01(): top 53 bits scaled by 2^-53, in [0, 1).
/// Any implementation reproducing these two mappings over mt19937_64 gets the
/// same splits, triplets and initial weights.
class Rng {
 public:
  using State = std::mt19937_64;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % bound);
  }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Box-Muller on two uniform01 draws.
  double normal(double mean = 0.0, double stddev = 1.0);

  /// Fisher-Yates from the back.
  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

  /// Derive an independent stream, e.g. one per epoch or per fold.
  Rng fork(std::uint64_t salt) {
    return Rng(next_u64() ^ (0x9E3779B97F4A7C15ULL * (salt + 1)));
  }

  State& state() { return engine_; }
  const State& state() const { return engine_; }

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  State engine_;
};

}  // namespace oto
