#include "ctlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace ctlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_pair(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

double uniform01(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t h = hash_pair(seed, counter);
  return static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
}

double standard_normal(std::uint64_t seed, std::uint64_t counter) {
  // Box-Muller, cosine branch only; each normal owns two uniforms.
  const double u1 = uniform01(seed, 2 * counter);
  const double u2 = uniform01(seed, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hash_pair(seed, h);
}

std::uint64_t CounterRng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    const std::uint64_t h = hash_pair(seed_, counter_++);
    if (h < limit) return h % n;
  }
}

}  // namespace ctlab
