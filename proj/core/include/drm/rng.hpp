#pragma once

#include <cstdint>

namespace drm {

// Counter-based generator: the k-th draw of a stream is a pure function of
// (seed, stream, k), so any slice of a batch can be generated independently
// and the result does not depend on the standard library's distributions.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix(key_ + counter * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  constexpr double open01(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr double uniform(std::uint64_t counter, double lo, double hi) const noexcept {
    return lo + (hi - lo) * open01(counter);
  }

  /// Uniform integer in [0, n).
  constexpr std::uint64_t below(std::uint64_t counter, std::uint64_t n) const noexcept {
    return static_cast<std::uint64_t>(open01(counter) * static_cast<double>(n)) % n;
  }

  /// Derive an independent stream, e.g. one per seed/run/layer.
  constexpr CounterRng split(std::uint64_t stream) const noexcept {
    return CounterRng(key_, stream + 1);
  }

  class Cursor;
  /// Stateful cursor over this stream, for sequential consumers.
  constexpr Cursor cursor() const noexcept;

 private:
  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

class CounterRng::Cursor {
 public:
  constexpr explicit Cursor(CounterRng rng) noexcept : rng_(rng) {}
  constexpr double open01() noexcept { return rng_.open01(next_++); }
  constexpr double uniform(double lo, double hi) noexcept { return rng_.uniform(next_++, lo, hi); }
  constexpr std::uint64_t below(std::uint64_t n) noexcept { return rng_.below(next_++, n); }
  constexpr int sign() noexcept { return (rng_.bits(next_++) >> 63) ? 1 : -1; }

 private:
  CounterRng rng_;
  std::uint64_t next_ = 0;
};

constexpr CounterRng::Cursor CounterRng::cursor() const noexcept { return Cursor(*this); }

}  // namespace drm
