#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace ncmart {

// Every randomized routine in the library draws from this explicitly seeded
// generator.  Bits come from std::mt19937_64, whose output sequence is fixed
// by the C++ standard; gaussians come from a fixed Box-Muller transform on
// 53-bit uniforms instead of std::normal_distribution, whose output is
// implementation-defined.  Identical seeds therefore give identical streams
// on every platform, which the byte-stable report requirement relies on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n must be positive.  The modulo bias is
  // below 2^-50 for the small ranges used here.
  int uniform_int(int n) {
    return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
  }

  // Standard real gaussian, Box-Muller with a cached spare.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    do {
      u = uniform();
    } while (u <= 0.0);
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double angle = 6.28318530717958647692528676655900577 * v;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  // Complex gaussian with unit variance: (g1 + i g2) / sqrt(2).
  std::complex<double> complex_gaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re * 0.70710678118654752440, im * 0.70710678118654752440};
  }

  // Fair sign.
  double pm_one() { return (engine_() & 1u) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ncmart
