#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace graphmem {

// Seeded random stream. Wraps std::mt19937_64 (whose output sequence is fixed
// by the standard) and derives reals and bounded integers from raw bits, so
// results do not depend on the standard library's distribution classes.
class Rng {
public:
  explicit Rng(std::uint64_t seed): engine_(seed) { }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling removes modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  int range(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[below(i)]);
  }

  // Independent child stream; used to give each consumer its own sequence.
  Rng fork() { return Rng(engine_() ^ 0x9E3779B97F4A7C15ULL); }

private:
  std::mt19937_64 engine_;
};

} // namespace graphmem
