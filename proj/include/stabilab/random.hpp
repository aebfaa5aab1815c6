#pragma once

#include <cstdint>
#include <random>

namespace stabilab {

// Derives the seed for sub-stream `index` from `master`. This is the fixed
// seed-derivation function used everywhere reproducibility is promised:
// splitmix64's finalizer applied to master + GOLDEN * (index + 1).
inline std::uint64_t mix64(std::uint64_t master, std::uint64_t index) {
  std::uint64_t x = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded generator with fully specified output mappings, so results are
// bit-reproducible across platforms and worker counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform index in {0, ..., m-1}.
  std::size_t below(std::size_t m) {
    auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(m));
    return i < m ? i : m - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace stabilab
