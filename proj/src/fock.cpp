#include "twophoto/fock.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "twophoto/detail/indexing.hpp"

namespace twophoto {

using detail::strides_for;
using detail::subspace_offsets;

double FockVector::truncation_error() const {
  return std::max(0.0, 1.0 - norm_squared());
}

bool FockVector::is_normalized(double tol) const {
  return std::fabs(std::sqrt(norm_squared()) - 1.0) <= tol;
}

int product_dim(const std::vector<int>& cutoffs) {
  if (cutoffs.empty()) throw std::invalid_argument("product_dim: empty cutoff list");
  std::size_t dim = 1;
  for (int c : cutoffs) {
    if (c < 1) throw std::invalid_argument("product_dim: cutoff must be >= 1");
    dim *= static_cast<std::size_t>(c);
    require_dim(dim, "product_dim");
  }
  return static_cast<int>(dim);
}

FockVector vacuum_state(const std::vector<int>& cutoffs) {
  FockVector psi{cutoffs, Vec::Zero(product_dim(cutoffs))};
  psi.amplitudes(0) = 1.0;
  return psi;
}

FockVector fock_state(int n, int cutoff) {
  if (n < 0 || n >= cutoff) throw std::invalid_argument("fock_state: n outside [0, cutoff)");
  FockVector psi{{cutoff}, Vec::Zero(cutoff)};
  psi.amplitudes(n) = 1.0;
  return psi;
}

int coherent_cutoff(Complex z) {
  double a = std::abs(z);
  return static_cast<int>(std::ceil(a * a + 6.0 * a + 10.0));
}

FockVector coherent_vector(Complex z, int cutoff) {
  if (cutoff < 1) throw std::invalid_argument("coherent_vector: cutoff must be >= 1");
  double a = std::abs(z);
  if (a * a + 6.0 * a >= static_cast<double>(cutoff)) {
    warn("coherent_vector: cutoff " + std::to_string(cutoff) +
         " leaves visible tail mass for |z| = " + std::to_string(a));
  }
  FockVector psi{{cutoff}, Vec::Zero(cutoff)};
  Complex c = std::exp(-0.5 * a * a);
  psi.amplitudes(0) = c;
  for (int n = 1; n < cutoff; ++n) {
    c *= z / std::sqrt(static_cast<double>(n));
    psi.amplitudes(n) = c;
  }
  return psi;
}

double DensityOperator::hermiticity_defect() const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

DensityOperator DensityOperator::from_pure(const FockVector& psi) {
  return {psi.cutoffs, psi.amplitudes * psi.amplitudes.adjoint()};
}

DensityOperator DensityOperator::diagonal(const Eigen::VectorXd& populations) {
  const int c = static_cast<int>(populations.size());
  Mat m = Mat::Zero(c, c);
  for (int i = 0; i < c; ++i) {
    if (populations(i) < 0.0) throw std::invalid_argument("diagonal: negative population");
    m(i, i) = populations(i);
  }
  return {{c}, m};
}

ModeOperator annihilation(int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("annihilation: cutoff must be >= 2");
  Mat m = Mat::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {{cutoff}, m, false};
}

ModeOperator creation(int cutoff) {
  ModeOperator a = annihilation(cutoff);
  return {{cutoff}, a.matrix.adjoint(), false};
}

ModeOperator number_operator(int cutoff) {
  if (cutoff < 1) throw std::invalid_argument("number_operator: cutoff must be >= 1");
  Mat m = Mat::Zero(cutoff, cutoff);
  for (int n = 0; n < cutoff; ++n) m(n, n) = static_cast<double>(n);
  return {{cutoff}, m, true};
}

ModeOperator identity_operator(const std::vector<int>& cutoffs) {
  const int d = product_dim(cutoffs);
  return {cutoffs, Mat::Identity(d, d), true};
}

ModeOperator quadrature(double phi, int cutoff) {
  ModeOperator a = annihilation(cutoff);
  Mat m = 0.5 * (a.matrix.adjoint() * std::polar(1.0, phi) + a.matrix * std::polar(1.0, -phi));
  return {{cutoff}, m, true};
}

Mat matrix_exponential(const Mat& a) { return a.exp(); }

ModeOperator displacement(Complex gamma, int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("displacement: cutoff must be >= 2");
  ModeOperator a = annihilation(cutoff);
  Mat gen = gamma * a.matrix.adjoint() - std::conj(gamma) * a.matrix;
  return {{cutoff}, matrix_exponential(gen), false};
}

ModeOperator embed(const ModeOperator& op, const std::vector<int>& cutoffs, int mode) {
  if (mode < 0 || mode >= static_cast<int>(cutoffs.size())) {
    throw std::invalid_argument("embed: mode index out of range");
  }
  if (op.cutoffs.size() != 1 || op.cutoffs[0] != cutoffs[mode]) {
    throw std::invalid_argument("embed: operator cutoff mismatch");
  }
  std::vector<ModeOperator> factors;
  factors.reserve(cutoffs.size());
  for (int k = 0; k < static_cast<int>(cutoffs.size()); ++k) {
    if (k == mode) {
      factors.push_back(op);
    } else {
      factors.push_back(identity_operator({cutoffs[k]}));
    }
  }
  return tensor(factors);
}

ModeOperator tensor(const std::vector<ModeOperator>& ops) {
  if (ops.empty()) throw std::invalid_argument("tensor: empty list");
  ModeOperator out = ops.front();
  for (std::size_t i = 1; i < ops.size(); ++i) {
    std::vector<int> cutoffs = out.cutoffs;
    cutoffs.insert(cutoffs.end(), ops[i].cutoffs.begin(), ops[i].cutoffs.end());
    product_dim(cutoffs);
    Mat m = Eigen::kroneckerProduct(out.matrix, ops[i].matrix);
    out = {std::move(cutoffs), std::move(m), out.hermitian && ops[i].hermitian};
  }
  return out;
}

FockVector tensor(const std::vector<FockVector>& states) {
  if (states.empty()) throw std::invalid_argument("tensor: empty list");
  FockVector out = states.front();
  for (std::size_t i = 1; i < states.size(); ++i) {
    std::vector<int> cutoffs = out.cutoffs;
    cutoffs.insert(cutoffs.end(), states[i].cutoffs.begin(), states[i].cutoffs.end());
    product_dim(cutoffs);
    Vec v = Eigen::kroneckerProduct(out.amplitudes, states[i].amplitudes);
    out = {std::move(cutoffs), std::move(v)};
  }
  return out;
}

DensityOperator tensor(const std::vector<DensityOperator>& rhos) {
  if (rhos.empty()) throw std::invalid_argument("tensor: empty list");
  DensityOperator out = rhos.front();
  for (std::size_t i = 1; i < rhos.size(); ++i) {
    std::vector<int> cutoffs = out.cutoffs;
    cutoffs.insert(cutoffs.end(), rhos[i].cutoffs.begin(), rhos[i].cutoffs.end());
    product_dim(cutoffs);
    Mat m = Eigen::kroneckerProduct(out.matrix, rhos[i].matrix);
    out = {std::move(cutoffs), std::move(m)};
  }
  return out;
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<int>& keep) {
  const int num_modes = rho.num_modes();
  std::vector<bool> kept(num_modes, false);
  for (int m : keep) {
    if (m < 0 || m >= num_modes) throw std::invalid_argument("partial_trace: mode index out of range");
    if (kept[m]) throw std::invalid_argument("partial_trace: duplicate mode index");
    kept[m] = true;
  }
  if (keep.empty()) throw std::invalid_argument("partial_trace: must keep at least one mode");

  std::vector<int> traced;
  for (int m = 0; m < num_modes; ++m) {
    if (!kept[m]) traced.push_back(m);
  }
  const auto strides = strides_for(rho.cutoffs);
  const auto keep_off = subspace_offsets(rho.cutoffs, strides, keep);
  const auto traced_off = traced.empty() ? std::vector<std::ptrdiff_t>{0}
                                         : subspace_offsets(rho.cutoffs, strides, traced);

  std::vector<int> out_cutoffs;
  for (int m : keep) out_cutoffs.push_back(rho.cutoffs[m]);
  const int d = product_dim(out_cutoffs);
  Mat out = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      Complex sum = 0.0;
      for (std::ptrdiff_t t : traced_off) {
        sum += rho.matrix(keep_off[i] + t, keep_off[j] + t);
      }
      out(i, j) = sum;
    }
  }
  return {out_cutoffs, std::move(out)};
}

FockVector apply(const ModeOperator& op, const FockVector& psi) {
  if (op.dim() != psi.dim()) throw std::invalid_argument("apply: dimension mismatch");
  return {psi.cutoffs, op.matrix * psi.amplitudes};
}

Complex expectation(const ModeOperator& op, const FockVector& psi) {
  if (op.dim() != psi.dim()) throw std::invalid_argument("expectation: dimension mismatch");
  return psi.amplitudes.dot(op.matrix * psi.amplitudes);
}

Complex expectation(const ModeOperator& op, const DensityOperator& rho) {
  if (op.dim() != rho.dim()) throw std::invalid_argument("expectation: dimension mismatch");
  return (rho.matrix * op.matrix).trace();
}

}  // namespace twophoto
