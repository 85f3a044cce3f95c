#pragma once

#include <cmath>
#include <cstdint>

namespace predrisk {

// Splittable counter-keyed random stream.
//
// A stream is fully determined by (master_seed, stream_index); replicate i of a
// Monte Carlo run always draws from stream i regardless of how replicates are
// scheduled across threads, which is what makes runs bit-reproducible under any
// worker count. The core generator is the splitmix64 sequence whose start state
// is a double-finalized hash of the key pair.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : index_(stream_index) {
    std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (stream_index + 1);
    state_ = finalize(finalize(z) ^ 0xBF58476D1CE4E5B9ULL);
  }

  std::uint64_t stream_index() const { return index_; }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return finalize(state_);
  }

  // Uniform on (0,1), 53-bit mantissa, never exactly 0 or 1.
  double next_u01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Marsaglia polar; pairs are cached inside the stream.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_u01() - 1.0;
      v = 2.0 * next_u01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // Gamma(shape, scale 1) by Marsaglia-Tsang squeeze; shape < 1 boosted.
  double next_gamma(double shape) {
    if (shape < 1.0) {
      const double g = next_gamma(shape + 1.0);
      return g * std::pow(next_u01(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = next_gaussian();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_u01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double next_chi2(double df) { return 2.0 * next_gamma(0.5 * df); }

  // Noncentral chi-square: one shifted normal coordinate plus a central remainder.
  double next_noncentral_chi2(double df, double lambda) {
    const double z = next_gaussian() + std::sqrt(lambda);
    double rest = 0.0;
    if (df > 1.0) rest = next_chi2(df - 1.0);
    return z * z + rest;
  }

  double next_poisson(double mean) {
    // Inversion for small means, normal-rounding rejection not needed for our ranges;
    // PTRS-style not required since means stay modest in tilted samplers.
    if (mean < 30.0) {
      const double l = std::exp(-mean);
      double p = 1.0;
      double k = 0.0;
      do {
        ++k;
        p *= next_u01();
      } while (p > l);
      return k - 1.0;
    }
    // Split recursively to keep the inversion loop short.
    const double half = std::floor(mean / 2.0);
    return next_poisson(half) + next_poisson(mean - half);
  }

 private:
  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t index_ = 0;
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Deterministic sub-seed derivation for nested randomized stages (quadrature nodes,
// bracket grids). Distinct tags give statistically unrelated child seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  RngStream s(seed, 0x5eedu ^ tag);
  return s.next_u64();
}

}  // namespace predrisk
