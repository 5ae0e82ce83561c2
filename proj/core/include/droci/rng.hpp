#pragma once

#include <cmath>
#include <cstdint>

namespace droci {

// splitmix64: tiny, fast, and good enough statistically for Monte Carlo
// seeding and sampling; chosen over std engines so streams are reproducible
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1): never exactly 0 or 1.
  double uniform() {
    return (double(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Marsaglia–Tsang for shape >= 1 (all uses here have shape 2).
  double gamma(double shape, double scale) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return scale * d * v;
    }
  }

  double chi2_2() { return -2.0 * std::log(uniform()); }

  double student_t3() {
    const double z = normal();
    const double c = gamma(1.5, 2.0);  // chi-square with 3 df
    return z / std::sqrt(c / 3.0);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Injective-in-r stream derivation: finalize seed + r * odd constant with the
// splitmix64 mixer. Distinct (seed, r, k) give distinct streams in practice.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t r,
                              std::uint64_t k = 0) {
  std::uint64_t z = seed + r * 0x9E3779B97F4A7C15ULL + k * 0xD1B54A32D192ED03ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace droci
