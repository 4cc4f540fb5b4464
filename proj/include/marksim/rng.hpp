#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace marksim {

// xoshiro256** seeded through splitmix64. Self-contained so that draws are
// bit-identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::uint64_t state_[4];
};

// Derives independent named substreams from one root seed. Streams are keyed
// by (label, index) so adding a flow or a component never perturbs the draws
// seen by any other component.
class RngFactory {
 public:
  explicit RngFactory(std::uint64_t root) : root_(root) {}

  Rng stream(std::string_view label, std::uint64_t index = 0) const {
    std::uint64_t x = root_ ^ (fnv1a(label) + 0x9E3779B97F4A7C15ULL * (index + 1));
    Rng::splitmix64(x);  // decorrelate nearby indices
    return Rng(Rng::splitmix64(x));
  }

  std::uint64_t derive_seed(std::uint64_t index) const {
    std::uint64_t x = root_ ^ (0xD1B54A32D192ED03ULL * (index + 1));
    return Rng::splitmix64(x);
  }

 private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return h;
  }
  std::uint64_t root_;
};

}  // namespace marksim
