#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace lpshrink {

namespace detail {

inline constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ull;

// Stafford mix13 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

}  // namespace detail

/// Splittable counter-style generator: stream k of a run seeded with `seed`
/// is derived from the pair (seed, k) alone, with a per-stream odd increment,
/// so one stream per replicate makes Monte Carlo results independent of how
/// replicates are scheduled across workers and identical across platforms.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream)
      : state_(detail::mix64(seed ^ detail::mix64(stream + detail::kGolden64))),
        increment_(detail::mix64((stream << 1) ^ detail::mix64(seed + 0x6A09E667F3BCC909ull)) |
                   1ull) {}

  std::uint64_t next_u64() {
    state_ += increment_;
    return detail::mix64(state_);
  }

  /// Uniform on (0, 1]; never zero, so it is safe under log.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second member of each pair is cached.
  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double radius = std::sqrt(-2.0 * std::log(next_unit()));
    const double angle = 2.0 * std::numbers::pi * next_unit();
    cached_ = radius * std::sin(angle);
    have_cached_ = true;
    return radius * std::cos(angle);
  }

  /// Gamma(shape, scale 1) by Marsaglia-Tsang squeeze; shape < 1 boosted via
  /// Gamma(shape+1) * U^{1/shape}.
  double next_gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("next_gamma: shape must be > 0");
    if (shape < 1.0) {
      const double u = next_unit();
      return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = next_normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_unit();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// chi^2_dof drawn as Gamma(dof/2, scale 2); any positive dof accepted.
  double next_chi_square(double dof) { return 2.0 * next_gamma(0.5 * dof); }

 private:
  std::uint64_t state_;
  std::uint64_t increment_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace lpshrink
