#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace entrynav {

// Derives a decorrelated per-run seed from the campaign master seed.
// Pure function of (master, index): adding runs never disturbs the seeds of
// earlier runs, which keeps incremental campaigns reproducible.
inline std::uint64_t derive_run_seed(std::uint64_t master,
                                     std::uint64_t run_index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (run_index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic stream owned by a single run. Draw helpers avoid
// std::uniform_real_distribution and std::normal_distribution on purpose:
// their outputs are not pinned across standard library implementations,
// while this construction is fully specified by the mt19937_64 bit stream.
class RunRng {
 public:
  explicit RunRng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Box-Muller without caching the second deviate, so every call consumes
  // exactly two generator words and the stream position stays predictable.
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    double radius = std::sqrt(-2.0 * std::log1p(-u1));
    return radius * std::cos(2.0 * std::numbers::pi * u2);
  }

  double gaussian(double sigma) { return sigma * gaussian(); }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace entrynav
