#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace gta {

using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

// Deterministic RNG wrapper. All random draws in the project go through
// this so that seeded runs are bitwise reproducible across platforms
// (std::uniform_*_distribution output is implementation-defined, the raw
// mt19937_64 stream is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform double in [0, 1), 53 bits of entropy.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) via rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// splitmix64 step; used to derive independent seed streams from one master
// seed without correlated low bits.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(base);
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  s = mix64(s ^ c);
  return s;
}

}  // namespace gta
