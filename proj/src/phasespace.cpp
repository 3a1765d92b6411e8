#include "twophoto/phasespace.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "twophoto/stats.hpp"

namespace twophoto {

namespace {

void validate_geometry(const GridGeometry& g) {
  if (!(g.half_extent > 0.0)) throw std::invalid_argument("grid: half_extent must be positive");
  if (g.points < 8 || (g.points & (g.points - 1)) != 0) {
    throw std::invalid_argument("grid: points per axis must be a power of two >= 8");
  }
}

}  // namespace

GridGeometry default_grid(Complex centroid, int points) {
  GridGeometry g;
  g.half_extent = std::max(6.0, std::abs(centroid) + 5.0);
  g.points = points;
  validate_geometry(g);
  return g;
}

double PhaseSpaceGrid::integral() const {
  const double h = geom.step();
  return values.real().sum() * h * h;
}

double PhaseSpaceGrid::max_imag_residue() const {
  return values.imag().cwiseAbs().maxCoeff();
}

double PhaseSpaceGrid::min_real_value() const { return values.real().minCoeff(); }

double PhaseSpaceGrid::value_at_origin() const {
  return values(geom.points / 2, geom.points / 2).real();
}

Eigen::Vector2d PhaseSpaceGrid::centroid() const {
  double w = 0.0, sx = 0.0, sy = 0.0;
  for (int i = 0; i < geom.points; ++i) {
    for (int j = 0; j < geom.points; ++j) {
      const double v = values(i, j).real();
      w += v;
      sx += v * geom.axis(i);
      sy += v * geom.axis(j);
    }
  }
  return {sx / w, sy / w};
}

Eigen::Vector2d PhaseSpaceGrid::marginal_variance() const {
  const Eigen::Vector2d c = centroid();
  double w = 0.0, vx = 0.0, vy = 0.0;
  for (int i = 0; i < geom.points; ++i) {
    for (int j = 0; j < geom.points; ++j) {
      const double v = values(i, j).real();
      w += v;
      vx += v * (geom.axis(i) - c(0)) * (geom.axis(i) - c(0));
      vy += v * (geom.axis(j) - c(1)) * (geom.axis(j) - c(1));
    }
  }
  return {vx / w, vy / w};
}

namespace detail_phasespace {

Complex chi_at(const DensityOperator& rho, Complex gamma) {
  if (rho.num_modes() != 1) throw std::invalid_argument("chi_at: expects a single-mode state");
  const int c = rho.dim();
  const double x = std::norm(gamma);
  const double ex = std::exp(-0.5 * x);

  // Tr[rho D(gamma)] summed over the diagonals of rho: the band at
  // distance d carries gamma^d and (-conj(gamma))^d with associated
  // Laguerre weights L_m^{(d)}(x) and sqrt(m! / (m+d)!) amplitudes.
  Complex total = 0.0;
  Complex gpow = 1.0;      // gamma^d
  Complex gbarpow = 1.0;   // (-conj(gamma))^d
  for (int d = 0; d < c; ++d) {
    if (d > 0) {
      gpow *= gamma;
      gbarpow *= -std::conj(gamma);
    }
    double ratio = 1.0;  // sqrt(m! / (m+d)!) for m = 0
    for (int i = 1; i <= d; ++i) ratio /= std::sqrt(static_cast<double>(i));
    double lprev = 0.0;
    double lcur = 1.0;  // L_0^{(d)}
    Complex band = 0.0;
    for (int m = 0; m + d < c; ++m) {
      if (m > 0) {
        const double lnext =
            ((2.0 * m - 1.0 + d - x) * lcur - (m - 1.0 + d) * lprev) / static_cast<double>(m);
        lprev = lcur;
        lcur = lnext;
        ratio *= std::sqrt(static_cast<double>(m) / static_cast<double>(m + d));
      }
      const double w = ratio * lcur;
      if (d == 0) {
        band += rho.matrix(m, m) * w;
      } else {
        band += (rho.matrix(m, m + d) * gpow + rho.matrix(m + d, m) * gbarpow) * w;
      }
    }
    total += band;
  }
  return ex * total;
}

double conjugate_step(const GridGeometry& g) { return M_PI / (2.0 * g.half_extent); }

Eigen::MatrixXcd characteristic_to_density(const Eigen::MatrixXcd& chi, const GridGeometry& g) {
  validate_geometry(g);
  const int n = g.points;
  if (chi.rows() != n || chi.cols() != n) {
    throw std::invalid_argument("characteristic_to_density: grid size mismatch");
  }
  if (n % 4 != 0) throw std::invalid_argument("characteristic_to_density: points must be divisible by 4");
  const double dgamma = conjugate_step(g);

  // density(p, q) = (dgamma^2 / pi^2) (-1)^{p+q}
  //                 * sum_{j,k} (-1)^{j+k} chi(j,k) e^{+2pi i jq/N} e^{-2pi i kp/N},
  // one forward FFT with the positive-sign axis read out index-reversed.
  std::vector<Complex> buf(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const double sign = ((j + k) % 2 == 0) ? 1.0 : -1.0;
      buf[static_cast<std::size_t>(j) * n + k] = sign * chi(j, k);
    }
  }
  fftw_plan plan = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(buf.data()),
                                    reinterpret_cast<fftw_complex*>(buf.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  const double scale = dgamma * dgamma / (M_PI * M_PI);
  Eigen::MatrixXcd out(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      const int jj = (n - q) % n;
      const double sign = ((p + q) % 2 == 0) ? 1.0 : -1.0;
      out(p, q) = scale * sign * buf[static_cast<std::size_t>(jj) * n + p];
    }
  }
  return out;
}

}  // namespace detail_phasespace

using detail_phasespace::characteristic_to_density;
using detail_phasespace::chi_at;
using detail_phasespace::conjugate_step;

PhaseSpaceGrid characteristic_function(const DensityOperator& rho, const GridGeometry& g) {
  validate_geometry(g);
  PhaseSpaceGrid grid{g, GridKind::Characteristic, Eigen::MatrixXcd(g.points, g.points)};
  for (int i = 0; i < g.points; ++i) {
    for (int j = 0; j < g.points; ++j) {
      grid.values(i, j) = chi_at(rho, Complex(g.axis(i), g.axis(j)));
    }
  }
  double boundary = 0.0;
  for (int i = 0; i < g.points; ++i) {
    boundary = std::max({boundary, std::abs(grid.values(i, 0)), std::abs(grid.values(0, i)),
                         std::abs(grid.values(i, g.points - 1)),
                         std::abs(grid.values(g.points - 1, i))});
  }
  if (boundary > 1e-4) {
    warn("characteristic_function: |chi| = " + std::to_string(boundary) +
         " at the grid boundary; enlarge the extent");
  }
  return grid;
}

PhaseSpaceGrid wigner_function(const DensityOperator& rho, const GridGeometry& g) {
  validate_geometry(g);
  const int n = g.points;
  const double dg = conjugate_step(g);
  Eigen::MatrixXcd chi(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      chi(j, k) = chi_at(rho, Complex((j - n / 2) * dg, (k - n / 2) * dg));
    }
  }
  return {g, GridKind::Wigner, characteristic_to_density(chi, g)};
}

PhaseSpaceGrid propensity(const DensityOperator& signal, const DensityOperator& probe,
                          const GridGeometry& g, Efficiency eta) {
  validate_geometry(g);
  const int n = g.points;
  const double dg = conjugate_step(g);
  const double e = eta.value();
  const double noise_coef = (1.0 - e) / e;  // two vacuum noise quadrature pairs

  // Joint characteristic function of Z = a_s + a_b^dag in the same
  // (gamma, conj-gamma) orientation the Wigner kernel uses: the signal
  // enters at gamma and the probe at -conj(gamma). This is what centers a
  // coherent-alpha / coherent-beta pair at alpha + conj(beta), matching the
  // calibrated sample plane.
  Eigen::MatrixXcd xi(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const Complex gamma((j - n / 2) * dg, (k - n / 2) * dg);
      Complex v = chi_at(signal, gamma) * chi_at(probe, -std::conj(gamma));
      if (e < 1.0) v *= std::exp(-noise_coef * std::norm(gamma));
      xi(j, k) = v;
    }
  }
  PhaseSpaceGrid grid{g, GridKind::Propensity, characteristic_to_density(xi, g)};
  const double ripple = grid.min_real_value();
  if (ripple < -1e-6) {
    warn("propensity: negative ripple " + std::to_string(ripple) +
         " below tolerance; grid resolution may be too coarse");
  }
  return grid;
}

PhaseSpaceGrid empirical_density(const std::vector<std::pair<double, double>>& samples,
                                 const GridGeometry& g) {
  validate_geometry(g);
  if (samples.empty()) throw std::invalid_argument("empirical_density: no samples");
  const int n = g.points;
  const double h = g.step();
  PhaseSpaceGrid grid{g, GridKind::Empirical, Eigen::MatrixXcd::Zero(n, n)};
  grid.total_samples = samples.size();
  const double weight = 1.0 / (static_cast<double>(samples.size()) * h * h);
  for (const auto& [x, y] : samples) {
    const long ix = std::lround(x / h) + n / 2;
    const long iy = std::lround(y / h) + n / 2;
    if (ix < 0 || ix >= n || iy < 0 || iy >= n) {
      ++grid.outside_samples;
      continue;
    }
    grid.values(ix, iy) += weight;
  }
  return grid;
}

std::vector<std::pair<double, double>> sample_from_grid(const PhaseSpaceGrid& grid,
                                                        RngStream& rng, std::size_t n) {
  const int np = grid.geom.points;
  const double h = grid.geom.step();
  std::vector<double> cdf(static_cast<std::size_t>(np) * np);
  double acc = 0.0;
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < np; ++j) {
      acc += std::max(0.0, grid.values(i, j).real());
      cdf[static_cast<std::size_t>(i) * np + j] = acc;
    }
  }
  if (acc <= 0.0) throw std::invalid_argument("sample_from_grid: grid has no positive mass");
  std::vector<std::pair<double, double>> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double u = rng.uniform() * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const std::size_t cell = static_cast<std::size_t>(it - cdf.begin());
    const int i = static_cast<int>(cell / np);
    const int j = static_cast<int>(cell % np);
    out[s] = {grid.geom.axis(i) + (rng.uniform() - 0.5) * h,
              grid.geom.axis(j) + (rng.uniform() - 0.5) * h};
  }
  return out;
}

DistanceReport distribution_distance(const PhaseSpaceGrid& analytic,
                                     const PhaseSpaceGrid& empirical) {
  if (!(analytic.geom == empirical.geom)) {
    throw std::invalid_argument("distribution_distance: grid geometries differ");
  }
  if (empirical.total_samples == 0) {
    throw std::invalid_argument("distribution_distance: empirical grid has no samples");
  }
  const int np = analytic.geom.points;
  const double h = analytic.geom.step();
  const double n = static_cast<double>(empirical.total_samples);

  DistanceReport report;
  report.n_samples = empirical.total_samples;

  double p_sum = 0.0, tv = 0.0;
  double pooled_expected = 0.0, pooled_observed = 0.0;
  double chi2 = 0.0;
  std::size_t bins = 0;
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < np; ++j) {
      const double p = std::max(0.0, analytic.values(i, j).real()) * h * h;
      const double observed = empirical.values(i, j).real() * n * h * h;
      p_sum += p;
      tv += std::fabs(p - observed / n);
      const double expected = n * p;
      if (expected >= 5.0) {
        chi2 += (observed - expected) * (observed - expected) / expected;
        ++bins;
      } else {
        pooled_expected += expected;
        pooled_observed += observed;
      }
    }
  }
  const double p_out = std::max(0.0, 1.0 - p_sum);
  pooled_expected += n * p_out;
  pooled_observed += static_cast<double>(empirical.outside_samples);
  tv += std::fabs(p_out - static_cast<double>(empirical.outside_samples) / n);
  if (pooled_expected > 0.0 || pooled_observed > 0.0) {
    // A vanishing-expectation pool with observations is an honest mismatch;
    // floor the denominator so it rejects instead of dividing by zero.
    chi2 += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) /
            std::max(pooled_expected, 1e-3);
    ++bins;
  }
  report.total_variation = 0.5 * tv;
  report.chi_squared = chi2;
  report.dof = bins > 1 ? bins - 1 : 1;
  report.p_value = stats::chi_squared_sf(chi2, static_cast<double>(report.dof));
  return report;
}

}  // namespace twophoto
