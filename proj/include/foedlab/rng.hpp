#pragma once

#include <cstdint>

namespace foedlab {

// Counter-based generator: draw i of a stream is a bijective 64-bit hash of
// (key, i), so streams are reproducible across platforms and any draw can be
// regenerated without replaying the ones before it. Monte Carlo code gives
// every path its own substream; running paths in any order, or in parallel,
// produces the same numbers as a serial loop.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double next_uniform();  // open interval (0, 1)
  double next_normal();   // standard normal via the inverse CDF
  // Gamma(shape, scale 1) by Marsaglia-Tsang squeeze; shape > 0. Consumes a
  // variable number of draws (rejection), which is harmless per-substream.
  double next_gamma(double shape);
  // Poisson(mean) by CDF inversion; large means are split additively into
  // chunks so the inversion walk stays short.
  std::uint64_t next_poisson(double mean);

  // Derived generator for path/work-item `index`: fresh key, counter 0.
  CounterRng substream(std::uint64_t index) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

// Inverse of the standard normal CDF (Wichura's rational approximations);
// absolute error below 1e-15 over (0, 1).
double normal_quantile(double p);

// Standard normal CDF via erfc.
double normal_cdf(double x);

}  // namespace foedlab
