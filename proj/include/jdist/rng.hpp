#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace jdist {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `stream` of draw `draw` under a run seed:
///   splitmix64(splitmix64(seed ^ splitmix64(stream)) + draw)
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + draw);
}

/// Reproducible generator: std::mt19937_64 (whose output sequence is fixed by
/// the standard) plus bounded draws by rejection, so the same seed yields the
/// same draws on every platform and in any language with an MT19937-64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound) for bound >= 1: reject raw outputs at or above the
  /// largest multiple of bound, then reduce.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t r = 0;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// `count` distinct values from [lo, lo + range), by partial Fisher-Yates:
  /// for i = 0..count-1 swap slot i with slot i + below(range - i). Returned in
  /// draw order.
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t lo, std::uint32_t range,
                                                        std::uint32_t count) {
    std::vector<std::uint32_t> pool(range);
    std::iota(pool.begin(), pool.end(), lo);
    for (std::uint32_t i = 0; i < count; ++i) {
      const auto j = i + static_cast<std::uint32_t>(below(range - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace jdist
