#include "twophoto/photodet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "twophoto/linopt.hpp"

namespace twophoto {

Efficiency::Efficiency(double eta) : eta_(eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("Efficiency: eta must lie in (0, 1]");
  }
}

double CountDistribution::mean() const {
  double m = 0.0;
  for (int i = 0; i < probs.size(); ++i) m += static_cast<double>(i) * probs(i);
  return m;
}

double CountDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (int i = 0; i < probs.size(); ++i) {
    const double d = static_cast<double>(i) - m;
    v += d * d * probs(i);
  }
  return v;
}

CountDistribution ideal_counts(const DensityOperator& rho, int mode) {
  const DensityOperator reduced =
      rho.num_modes() == 1 ? rho : partial_trace(rho, {mode});
  const int c = reduced.dim();
  CountDistribution out;
  out.probs = Eigen::VectorXd(c);
  for (int m = 0; m < c; ++m) {
    // Tiny negative diagonal entries are roundoff; fold them into the books.
    out.probs(m) = std::max(0.0, reduced.matrix(m, m).real());
  }
  out.deficit = std::max(0.0, 1.0 - out.probs.sum());
  return out;
}

namespace {

// log C(n, m); exact table is fine below 50, log-gamma above.
double log_binomial(int n, int m) {
  return std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0);
}

double binomial_weight(int n, int m, double eta) {
  if (n < 50) {
    double c = 1.0;
    for (int i = 0; i < m; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return c * std::pow(eta, m) * std::pow(1.0 - eta, n - m);
  }
  const double logw = log_binomial(n, m) + m * std::log(eta) +
                      (n - m) * std::log1p(-eta);
  return std::exp(logw);
}

}  // namespace

CountDistribution lossy_counts_binomial(const CountDistribution& p, Efficiency eta) {
  const double e = eta.value();
  const int c = static_cast<int>(p.probs.size());
  CountDistribution out;
  out.probs = Eigen::VectorXd::Zero(c);
  out.deficit = p.deficit;
  if (e == 1.0) {
    out.probs = p.probs;
    return out;
  }
  for (int n = 0; n < c; ++n) {
    if (p.probs(n) == 0.0) continue;
    for (int m = 0; m <= n; ++m) {
      out.probs(m) += p.probs(n) * binomial_weight(n, m, e);
    }
  }
  return out;
}

CountDistribution lossy_counts_beamsplitter(const DensityOperator& rho, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("lossy_counts_beamsplitter: tau must lie in (0, 1]");
  }
  if (rho.num_modes() != 1) {
    throw std::invalid_argument("lossy_counts_beamsplitter: expects a single-mode state");
  }
  const int c = rho.dim();
  // The idle port can swallow every photon, so it needs the same headroom.
  const std::vector<int> cutoffs{c, c};
  const ModeOperator u = lift_to_fock(beamsplitter_matrix(tau), cutoffs);

  DensityOperator vac = DensityOperator::from_pure(vacuum_state({c}));
  DensityOperator joint = tensor(std::vector<DensityOperator>{rho, vac});
  Mat evolved = u.matrix * joint.matrix * u.matrix.adjoint();

  CountDistribution out;
  out.probs = Eigen::VectorXd::Zero(c);
  for (int m = 0; m < c; ++m) {
    double pm = 0.0;
    for (int j = 0; j < c; ++j) {
      pm += evolved(m * c + j, m * c + j).real();
    }
    out.probs(m) = std::max(0.0, pm);
  }
  out.deficit = std::max(0.0, 1.0 - out.probs.sum());
  return out;
}

LossEquivalenceReport loss_equivalence_check(const DensityOperator& rho, Efficiency eta) {
  LossEquivalenceReport report;
  report.binomial_probs = lossy_counts_binomial(ideal_counts(rho), eta).probs;
  report.beamsplitter_probs = lossy_counts_beamsplitter(rho, eta.value()).probs;
  report.max_abs_difference =
      (report.binomial_probs - report.beamsplitter_probs).cwiseAbs().maxCoeff();
  return report;
}

std::vector<std::int64_t> sample_counts(const CountDistribution& p, RngStream& rng,
                                        std::size_t n, double deficit_threshold) {
  if (p.deficit > deficit_threshold) {
    throw std::invalid_argument("sample_counts: truncation deficit " +
                                std::to_string(p.deficit) +
                                " above threshold; increase the cutoff");
  }
  const int c = static_cast<int>(p.probs.size());
  std::vector<double> cdf(c);
  double acc = 0.0;
  for (int i = 0; i < c; ++i) {
    acc += p.probs(i);
    cdf[i] = acc;
  }
  std::vector<std::int64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    out[i] = static_cast<std::int64_t>(it - cdf.begin());
  }
  return out;
}

std::vector<std::int64_t> sample_poisson(double mean, RngStream& rng, std::size_t n) {
  if (mean < 0.0) throw std::invalid_argument("sample_poisson: negative mean");
  std::vector<std::int64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.poisson(mean);
  return out;
}

}  // namespace twophoto
