#pragma once

#include <cstdint>
#include <string_view>

namespace seqnas {

// splitmix64 finalizer. Every seeded quantity in the project goes through
// this mixer so independent implementations can reproduce streams bit-exactly.
constexpr uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

constexpr uint64_t kGolden64 = 0x9E3779B97F4A7C15ull;

constexpr uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Maps a 64-bit word to [0,1) using the top 53 bits.
constexpr double unit_double(uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// splitmix64 sequence generator.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += kGolden64;
    return mix64(state_);
  }

  double next_unit() { return unit_double(next()); }            // [0,1)
  double next_sym() { return 2.0 * next_unit() - 1.0; }         // [-1,1)

  // Uniform integer in [0, n). Modulo bias is negligible for the small n
  // used here and keeps the stream layout trivial to document.
  uint64_t next_below(uint64_t n) { return n == 0 ? 0 : next() % n; }

  float next_uniform(float lo, float hi) {
    return lo + static_cast<float>(next_unit()) * (hi - lo);
  }

 private:
  uint64_t state_;
};

// Stable sub-seed derivation: stream `tag` of run seed `seed`.
constexpr uint64_t derive_seed(uint64_t seed, uint64_t tag) {
  return mix64(seed ^ mix64(tag + kGolden64));
}

}  // namespace seqnas
