#pragma once

// Seeded random variates with fully specified algorithms, so that a seed
// reproduces the same draws on every platform. (The std:: distributions are
// implementation-defined; only the engines are portable.)
//
// Streams: derive_seed(seed, k) mixes a base seed with a stream index through
// SplitMix64. Each bootstrap replicate or CV fold gets its own stream, so the
// draws do not depend on execution order.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>

#include "nbsparse/error.hpp"
#include "nbsparse/special.hpp"

namespace nbsparse {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t uniform_index(std::uint64_t bound) {
    if (bound == 0) throw ContractViolation("uniform_index: bound must be positive");
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound + 1) % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x > limit);
    return x % bound;
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  bool bernoulli(double q) { return uniform() < q; }

  /// Gamma(shape, scale) by Marsaglia & Tsang's squeeze method; shapes below
  /// one are boosted with Gamma(a) = Gamma(a + 1) U^(1/a).
  double gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw ContractViolation("gamma: shape and scale must be positive");
    if (shape < 1.0) {
      const double u = uniform_open();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  /// Poisson(mean): sequential inversion below mean 10, Hormann's PTRS
  /// transformed rejection above.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw ContractViolation("poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
      const double u = uniform();
      double pk = std::exp(-mean);
      double cdf = pk;
      std::uint64_t k = 0;
      while (u > cdf) {
        ++k;
        pk *= mean / static_cast<double>(k);
        const double next = cdf + pk;
        if (next == cdf) break;  // tail exhausted in double precision
        cdf = next;
      }
      return k;
    }
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform_open();
      const double us = 0.5 - std::abs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          -mean + k * log_mean - log_gamma(k + 1.0)) {
        return static_cast<std::uint64_t>(k);
      }
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace nbsparse
