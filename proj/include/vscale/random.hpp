#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace vscale {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream seed for one unit of work, e.g. derive_seed({seed, m, repeat}).
/// Independent of execution order, so parallel runs reproduce serial ones.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
  return h;
}

// mt19937_64 with distribution code of our own: the standard distributions
// are implementation-defined, and outputs here must be bit-stable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Writes k distinct indices drawn uniformly from [0, pool) into `out`
  /// (partial Fisher-Yates over `scratch`).
  void sample_without_replacement(int pool, int k, std::vector<int>& scratch, std::vector<int>& out) {
    scratch.resize(static_cast<std::size_t>(pool));
    for (int i = 0; i < pool; ++i) scratch[static_cast<std::size_t>(i)] = i;
    out.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      auto j = static_cast<std::size_t>(i) + below(static_cast<std::uint64_t>(pool - i));
      std::swap(scratch[static_cast<std::size_t>(i)], scratch[j]);
      out[static_cast<std::size_t>(i)] = scratch[static_cast<std::size_t>(i)];
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vscale
