#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace unhaze {

// 64-bit FNV-1a; used for stream-key derivation and file fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(std::string_view s);

// Hierarchical stream key. Every random decision in the pipeline draws from a
// key derived as root(seed) -> image id -> round -> operation, so reordering
// or parallelizing work cannot change the numbers drawn.
struct RngKey {
  std::uint64_t state = 0;

  static RngKey root(std::uint64_t seed);
  RngKey derive(std::uint64_t salt) const;
  RngKey derive(std::string_view tag) const;
};

// Deterministic generator. std::mt19937_64 has a standard-specified output
// sequence, and the uniform draw below avoids std::distributions, whose
// outputs vary across standard libraries.
class Rng {
 public:
  explicit Rng(RngKey key) : engine_(key.state) {}

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace unhaze
