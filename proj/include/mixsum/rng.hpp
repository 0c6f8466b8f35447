#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mixsum {

/// mt19937_64 behind fixed bounded-draw and shuffle routines so results do
/// not depend on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  /// Uniform draw in [0, n). n must be > 0.
  uint64_t below(uint64_t n) { return next() % n; }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
  }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Splits one base seed into independent streams (sampling, batching,
/// init, pairing) so the streams never alias.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  uint64_t h = base ^ (stream + 0x9e3779b97f4a7c15ULL);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

}  // namespace mixsum
