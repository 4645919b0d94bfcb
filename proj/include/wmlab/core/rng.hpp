#pragma once

#include <cmath>
#include <cstdint>

namespace wmlab {

// Deterministic splittable PRNG (splitmix64 core). Identical seeds give
// identical streams on every platform; children derived from the base seed
// are independent of draw order.
class RandomSource {
 public:
  explicit RandomSource(uint64_t seed) : base_(seed), state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

  uint64_t base_seed() const { return base_; }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // [0,1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // [0,n) unbiased
  int uniform_int(int n) {
    uint64_t bound = static_cast<uint64_t>(n);
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return static_cast<int>(r % bound);
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = 2.0 * M_PI * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Independent stream keyed off the base seed only.
  RandomSource child(uint64_t tag) const {
    return RandomSource(mix(base_ + 0x632be59bd9b4e019ull * (tag + 1)));
  }

 private:
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  uint64_t base_;
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace wmlab
