#pragma once

#include <cstdint>
#include <random>

namespace twophoto {

/// Counted-based deterministic RNG stream. A (seed, stream) pair fully
/// determines the sequence, so workers can draw independently and a run
/// is reproducible for any thread count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t raw();
  double uniform();  // [0, 1)
  double normal();   // standard normal

  /// Poisson sampler. Exact (Knuth / transformed rejection) below the
  /// normal-approximation threshold, rounded Gaussian above it.
  std::int64_t poisson(double mean);

  std::int64_t binomial(std::int64_t n, double p);

  /// Means above this use the normal approximation; mutable for tests.
  static double& poisson_normal_threshold();

 private:
  std::int64_t poisson_knuth(double mean);
  std::int64_t poisson_ptrs(double mean);

  std::mt19937_64 engine_;
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace twophoto
