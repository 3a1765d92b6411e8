#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "twophoto/fock.hpp"
#include "twophoto/rng.hpp"

namespace twophoto {

/// Detector quantum efficiency, the probability that a photon produces a
/// photoelectron. Range (0, 1] enforced at construction.
class Efficiency {
 public:
  explicit Efficiency(double eta);
  double value() const { return eta_; }

 private:
  double eta_;
};

/// Probabilities over photocounts m = 0..N. `deficit` is the probability
/// mass lost to basis truncation, so sum(probs) + deficit == 1.
struct CountDistribution {
  Eigen::VectorXd probs;
  double deficit = 0.0;

  double total() const { return probs.sum(); }
  double mean() const;
  double variance() const;
};

/// Unit-efficiency counting statistics: probs[m] = <m| rho |m> on the
/// designated mode (others traced out first).
CountDistribution ideal_counts(const DensityOperator& rho, int mode = 0);

/// Efficiency as a binomial convolution:
/// out[m] = sum_{n >= m} p[n] C(n, m) eta^m (1 - eta)^(n - m).
CountDistribution lossy_counts_binomial(const CountDistribution& p, Efficiency eta);

/// Efficiency as a transmissivity-tau splitter with vacuum on the idle
/// port: perfect counting on the transmitted output, idle port traced out.
CountDistribution lossy_counts_beamsplitter(const DensityOperator& rho, double tau);

struct LossEquivalenceReport {
  double max_abs_difference = 0.0;
  Eigen::VectorXd binomial_probs;
  Eigen::VectorXd beamsplitter_probs;
};

/// Runs both loss models at tau = eta and tabulates the per-count gap.
LossEquivalenceReport loss_equivalence_check(const DensityOperator& rho, Efficiency eta);

/// Inverse-CDF sampling; refuses when the truncation deficit is above the
/// threshold so an undersized cutoff fails loudly.
std::vector<std::int64_t> sample_counts(const CountDistribution& p, RngStream& rng,
                                        std::size_t n, double deficit_threshold = 1e-6);

std::vector<std::int64_t> sample_poisson(double mean, RngStream& rng, std::size_t n);

}  // namespace twophoto
