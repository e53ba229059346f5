#pragma once

#include <cmath>
#include <cstdint>

namespace frlab {

/// PCG32 generator (O'Neill). Small explicit state so streams can be
/// checkpointed and replayed bit-exactly, independent of the standard
/// library implementation.
class Rng {
 public:
  Rng() : Rng(0x853c49e6748fea9bULL) {}

  explicit Rng(uint64_t seed, uint64_t stream = 0xda3e39cb94b95bdbULL) {
    state_ = 0U;
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  uint32_t next_u32() {
    uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    uint32_t xorshifted = static_cast<uint32_t>(((old >> 18u) ^ old) >> 27u);
    uint32_t rot = static_cast<uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  uint64_t next_u64() {
    uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Integer uniform in [0, n), n > 0. Unbiased via rejection.
  uint32_t uniform_int(uint32_t n) {
    uint32_t threshold = (-n) % n;
    for (;;) {
      uint32_t r = next_u32();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Box-Muller. Consumes two uniforms per draw; no
  /// cached spare, so the stream position is a pure function of call count.
  double normal() {
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  uint64_t state() const { return state_; }
  uint64_t inc() const { return inc_; }
  void set_raw(uint64_t state, uint64_t inc) {
    state_ = state;
    inc_ = inc;
  }

  /// Derive an independent child stream, e.g. one per environment.
  Rng spawn(uint64_t key) {
    uint64_t seed = next_u64() ^ (key * 0x9e3779b97f4a7c15ULL);
    return Rng(seed, key * 2u + 1u);
  }

 private:
  uint64_t state_;
  uint64_t inc_;
};

}  // namespace frlab
