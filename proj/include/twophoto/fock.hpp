#pragma once

#include <Eigen/Dense>
#include <vector>

#include "twophoto/common.hpp"

namespace twophoto {

using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

/// Truncated number-basis state over one or more modes. Mode 0 is the
/// slowest-varying index (Kronecker ordering), so for cutoffs (c0, c1)
/// the amplitude of |n0, n1> sits at n0 * c1 + n1.
struct FockVector {
  std::vector<int> cutoffs;
  Vec amplitudes;

  int dim() const { return static_cast<int>(amplitudes.size()); }
  int num_modes() const { return static_cast<int>(cutoffs.size()); }
  double norm_squared() const { return amplitudes.squaredNorm(); }
  double truncation_error() const;
  bool is_normalized(double tol = 1e-10) const;
};

/// Dimension of the tensor-product space; throws past the configured cap.
int product_dim(const std::vector<int>& cutoffs);

FockVector vacuum_state(const std::vector<int>& cutoffs);
FockVector fock_state(int n, int cutoff);

/// Coherent amplitudes exp(-|z|^2/2) z^n / sqrt(n!) on |0..cutoff-1>.
/// Warns when the cutoff leaves visible Poisson tail mass.
FockVector coherent_vector(Complex z, int cutoff);

/// Cutoff heuristic ceil(|z|^2 + 6|z| + 10) keeping the tail below ~1e-8.
int coherent_cutoff(Complex z);

struct DensityOperator {
  std::vector<int> cutoffs;
  Mat matrix;

  int dim() const { return static_cast<int>(matrix.rows()); }
  int num_modes() const { return static_cast<int>(cutoffs.size()); }
  double trace_real() const { return matrix.trace().real(); }
  double hermiticity_defect() const;

  static DensityOperator from_pure(const FockVector& psi);
  /// Single-mode diagonal (classical) mixture; populations need not sum to 1,
  /// the deficit is whatever is missing.
  static DensityOperator diagonal(const Eigen::VectorXd& populations);
};

struct ModeOperator {
  std::vector<int> cutoffs;
  Mat matrix;
  bool hermitian = false;

  int dim() const { return static_cast<int>(matrix.rows()); }
};

ModeOperator annihilation(int cutoff);
ModeOperator creation(int cutoff);
ModeOperator number_operator(int cutoff);
ModeOperator identity_operator(const std::vector<int>& cutoffs);

/// Hermitian field quadrature (a^dag e^{i phi} + a e^{-i phi}) / 2.
ModeOperator quadrature(double phi, int cutoff);

/// exp(gamma a^dag - conj(gamma) a) via dense scaling-and-squaring.
ModeOperator displacement(Complex gamma, int cutoff);

/// Lift a single-mode operator onto mode `mode` of a larger space.
ModeOperator embed(const ModeOperator& op, const std::vector<int>& cutoffs, int mode);

ModeOperator tensor(const std::vector<ModeOperator>& ops);
FockVector tensor(const std::vector<FockVector>& states);
DensityOperator tensor(const std::vector<DensityOperator>& rhos);

/// Reduced density operator over the kept modes (in the given order),
/// tracing out the rest.
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<int>& keep);

FockVector apply(const ModeOperator& op, const FockVector& psi);
Complex expectation(const ModeOperator& op, const FockVector& psi);
Complex expectation(const ModeOperator& op, const DensityOperator& rho);

/// Dense matrix exponential (scaling and squaring with Pade approximant).
Mat matrix_exponential(const Mat& a);

}  // namespace twophoto
