#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "twophoto/fock.hpp"
#include "twophoto/photodet.hpp"
#include "twophoto/rng.hpp"

namespace twophoto {

enum class GridKind { Characteristic, Wigner, Propensity, Empirical };

/// Uniform square grid over Re, Im in [-L, L], `points` samples per axis.
/// Point i sits at (i - points/2) * step, so the origin is a grid point.
struct GridGeometry {
  double half_extent = 6.0;
  int points = 256;

  double step() const { return 2.0 * half_extent / points; }
  double axis(int i) const { return (i - points / 2) * step(); }
  bool operator==(const GridGeometry&) const = default;
};

/// L = max(6, |centroid| + 5): at least five standard deviations of the
/// widest Gaussian in scope.
GridGeometry default_grid(Complex centroid, int points = 256);

struct PhaseSpaceGrid {
  GridGeometry geom;
  GridKind kind = GridKind::Characteristic;
  /// values(ix, iy) at alpha = axis(ix) + i axis(iy).
  Eigen::MatrixXcd values;
  // Empirical bookkeeping.
  std::size_t total_samples = 0;
  std::size_t outside_samples = 0;

  double integral() const;  // Re(sum) * step^2
  double max_imag_residue() const;
  double min_real_value() const;
  double value_at_origin() const;
  Eigen::Vector2d centroid() const;
  /// Per-quadrature variances of the density around its centroid.
  Eigen::Vector2d marginal_variance() const;
};

/// chi(gamma) = Tr[rho D(gamma)] on the given grid (single-mode rho).
PhaseSpaceGrid characteristic_function(const DensityOperator& rho, const GridGeometry& g);

/// Fourier transform of chi normalized so the result integrates to 1
/// under plain d^2alpha; the vacuum peaks at 2/pi.
PhaseSpaceGrid wigner_function(const DensityOperator& rho, const GridGeometry& g);

/// Output distribution of an efficiency-eta joint measurement of
/// Z = a_signal + a_probe^dag: the signal Wigner function convolved with
/// the conjugate-reflected probe Wigner function and, for eta < 1, a
/// Gaussian efficiency filter. Computed as a characteristic-domain product
/// followed by one transform; integrates to 1 under d^2alpha.
PhaseSpaceGrid propensity(const DensityOperator& signal, const DensityOperator& probe,
                          const GridGeometry& g, Efficiency eta);

/// Bin-normalized density of (z1, z2) outcomes; integrates to the fraction
/// of samples inside the extent.
PhaseSpaceGrid empirical_density(const std::vector<std::pair<double, double>>& samples,
                                 const GridGeometry& g);

/// Draw points from a nonnegative density grid (cell-uniform within bins).
std::vector<std::pair<double, double>> sample_from_grid(const PhaseSpaceGrid& grid,
                                                        RngStream& rng, std::size_t n);

struct DistanceReport {
  double total_variation = 0.0;
  double chi_squared = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t n_samples = 0;
  bool pass(double significance = 0.01) const { return p_value > significance; }
};

/// Chi-squared and total-variation comparison of an analytic density
/// against an empirical histogram on the same geometry. Cells with
/// expected count below 5 are pooled (together with the off-grid mass).
DistanceReport distribution_distance(const PhaseSpaceGrid& analytic,
                                     const PhaseSpaceGrid& empirical);

namespace detail_phasespace {
/// chi values of rho at arbitrary points, via the closed-form displacement
/// matrix elements (associated Laguerre polynomials).
Complex chi_at(const DensityOperator& rho, Complex gamma);
/// gamma-grid spacing conjugate to an alpha geometry: pi / (2 L).
double conjugate_step(const GridGeometry& g);
/// Transform a characteristic-grid sample (on the conjugate grid) to a
/// density on `g`; kernel exp(conj(gamma) alpha - gamma conj(alpha)) with
/// measure d^2gamma / pi^2.
Eigen::MatrixXcd characteristic_to_density(const Eigen::MatrixXcd& chi, const GridGeometry& g);
}  // namespace detail_phasespace

}  // namespace twophoto
