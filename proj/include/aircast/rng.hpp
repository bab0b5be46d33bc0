#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "aircast/types.hpp"

namespace aircast {

// Deterministic random source. std::mt19937_64 has a portable bit stream, but
// the standard distributions do not, so every mapping from raw bits to a
// usable value is spelled out here. Results are identical across platforms
// and compilers for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  // Uniform integer in [lo, hi], inclusive. Rejection sampling keeps the
  // distribution exact.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Fisher-Yates, high index down.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::int64_t i = static_cast<std::int64_t>(v.size()) - 1; i > 0; --i) {
      const std::int64_t j = uniform_int(0, i);
      using std::swap;
      swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
  }

  // k distinct values from [0, n), in selection order.
  std::vector<std::int64_t> sample_without_replacement(std::int64_t n, std::int64_t k);

 private:
  std::mt19937_64 gen_;
};

// splitmix64 finalizer; used to derive phase seeds from a run seed so that
// independent random consumers never share a stream.
std::uint64_t mix_seed(std::uint64_t seed);
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace aircast
