#ifndef BRANCH_RNG_H
#define BRANCH_RNG_H

#include <cstdint>
#include <random>
#include <string_view>

#include "branch/maths.h"

namespace branch
{
/// Deterministic random source. All draws go through hand-rolled conversions
/// rather than std:: distributions, so sequences are bit-identical across
/// platforms and compilers for a given seed.
class Rng
{
public:
  explicit Rng(uint64_t seed)
    : gen_(seed)
  {}

  uint64_t next() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n == 0 ? 0 : gen_() % n; }

  /// Standard normal via Box-Muller.
  double normal()
  {
    if (have_spare_)
    {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * kPi * u2);
  }

  /// Uniform direction on the unit sphere.
  Vec3 unit_vector()
  {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * kPi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Vec3(s * std::cos(phi), s * std::sin(phi), z);
  }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Derives an independent child seed from a root seed, a stream name and an
/// index. Adding samples to a run never perturbs the streams of earlier ones.
uint64_t derive_seed(uint64_t root, std::string_view stream, uint64_t index);

}  // namespace branch

#endif  // BRANCH_RNG_H
