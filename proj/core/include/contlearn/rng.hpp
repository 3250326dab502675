#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace contlearn {

// Deterministic random source.
//
// The underlying generator is std::mt19937_64, whose output sequence is
// fully pinned by the C++ standard, so a given seed reproduces the same
// raw draws on every platform. Derived quantities are built from fixed
// integer arithmetic on those draws:
//   - uniform():  53-bit mantissa scaling, (x >> 11) * 2^-53, in [0, 1)
//   - normal():   Marsaglia polar method (pairs cached), uses sqrt/log
//   - below(n):   rejection sampling, no modulo bias
// normal() goes through libm, so bit-equality of Gaussian draws is only
// promised within one build of the library, not across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  // Uniform double in [0, 1).
  double uniform();

  // Normal with mean 0 and standard deviation sigma (> 0 enforced by callers).
  double normal(double sigma);

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates shuffle driven by below().
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // Child stream keyed by (original seed, label). Independent of how many
  // draws were taken from this stream, so adding a consumer never perturbs
  // the others.
  Rng derive(std::string_view label) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// 64-bit FNV-1a, used for stream derivation and parameter hashing.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t basis = 1469598103934665603ULL);

// splitmix64 finalizer; whitens derived seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace contlearn
