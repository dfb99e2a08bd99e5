#pragma once

#include <cstdint>
#include <string_view>

namespace ctlab {

// Stateless counter-based generator: every draw is a pure function of
// (seed, counter), so any schedule that visits the same counters
// produces the same numbers.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_pair(std::uint64_t seed, std::uint64_t counter);

// Uniform in (0, 1]; never returns 0 so log() is safe.
double uniform01(std::uint64_t seed, std::uint64_t counter);
double standard_normal(std::uint64_t seed, std::uint64_t counter);

// Seed for a named sub-task, e.g. derive_seed(global, "q=3").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

// Sequential convenience wrapper over the counter stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  double uniform() { return uniform01(seed_, counter_++); }
  double normal() { return standard_normal(seed_, counter_++); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace ctlab
