#include "unhaze/core/rng.hpp"

namespace unhaze {

namespace {

// splitmix64 finalizer: cheap, well-mixed 64-bit permutation.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

RngKey RngKey::root(std::uint64_t seed) { return RngKey{mix(seed)}; }

RngKey RngKey::derive(std::uint64_t salt) const { return RngKey{mix(state ^ mix(salt))}; }

RngKey RngKey::derive(std::string_view tag) const { return derive(fnv1a64(tag)); }

}  // namespace unhaze
