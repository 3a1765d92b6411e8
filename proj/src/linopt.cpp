#include "twophoto/linopt.hpp"

#include <cmath>
#include <stdexcept>

#include "twophoto/detail/indexing.hpp"

namespace twophoto {

double ScatteringMatrix::unitarity_defect() const {
  const int k = size();
  return (entries * entries.adjoint() - Mat::Identity(k, k)).cwiseAbs().maxCoeff();
}

ScatteringMatrix beamsplitter_matrix(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("beamsplitter_matrix: tau outside [0, 1]");
  }
  const double c = std::sqrt(tau);
  const double s = std::sqrt(1.0 - tau);
  Mat m(2, 2);
  m << c, s, -s, c;
  return {m};
}

ScatteringMatrix eightport_matrix() {
  Mat m(4, 4);
  const Complex i(0.0, 1.0);
  m << 1, 1, 1, 1,
       1, i, -1, -i,
       1, -1, 1, -1,
       1, -i, -1, i;
  return {0.5 * m};
}

ScatteringMatrix triple_coupler_matrix() {
  const Complex w = std::polar(1.0, 2.0 * M_PI / 3.0);
  Mat m(3, 3);
  m << 1, 1, 1,
       1, w, std::conj(w),
       1, std::conj(w), w;
  return {m / std::sqrt(3.0)};
}

ScatteringMatrix identity_network(int ports) {
  if (ports < 1) throw std::invalid_argument("identity_network: ports must be >= 1");
  return {Mat::Identity(ports, ports)};
}

Element Element::beam_splitter(int a, int b, double tau) {
  if (a == b) throw std::invalid_argument("beam_splitter: modes must differ");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("beam_splitter: tau outside [0, 1]");
  return {Kind::BeamSplitter, a, b, tau};
}

Element Element::phase_shifter(int mode, double phi) {
  return {Kind::PhaseShifter, mode, mode, phi};
}

ScatteringMatrix ElementSequence::compose(int ports) const {
  Mat m = Mat::Identity(ports, ports);
  for (const Element& e : elements) {
    if (e.mode_a < 0 || e.mode_a >= ports || e.mode_b < 0 || e.mode_b >= ports) {
      throw std::invalid_argument("compose: element mode out of range");
    }
    Mat step = Mat::Identity(ports, ports);
    if (e.kind == Element::Kind::BeamSplitter) {
      ScatteringMatrix bs = beamsplitter_matrix(e.value);
      step(e.mode_a, e.mode_a) = bs.entries(0, 0);
      step(e.mode_a, e.mode_b) = bs.entries(0, 1);
      step(e.mode_b, e.mode_a) = bs.entries(1, 0);
      step(e.mode_b, e.mode_b) = bs.entries(1, 1);
    } else {
      step(e.mode_a, e.mode_a) = std::polar(1.0, e.value);
    }
    m = step * m;
  }
  return {m};
}

TripleCouplerDecomposition triple_coupler_decomposition() {
  const double phi1 = std::acos(1.0 / 3.0);
  TripleCouplerDecomposition out;
  out.sequence.elements = {
      Element::beam_splitter(1, 2, 0.5),
      Element::phase_shifter(2, phi1 / 2.0),
      Element::beam_splitter(0, 1, 0.5),
      Element::phase_shifter(0, phi1),
      Element::beam_splitter(0, 1, 0.5),
      Element::beam_splitter(1, 2, 0.5),
  };
  const Mat c = out.sequence.compose(3).entries;
  const Mat t = triple_coupler_matrix().entries;

  // The circuit fixes only internal phases, so fit diagonal unitaries:
  // D_out C D_in = T. Gauge: no correction on output 0 beyond what input
  // phases absorb.
  Eigen::Matrix3d theta;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) theta(j, k) = std::arg(t(j, k) / c(j, k));
  }
  for (int k = 0; k < 3; ++k) out.input_phases(k) = std::polar(1.0, theta(0, k));
  for (int j = 0; j < 3; ++j) out.output_phases(j) = std::polar(1.0, theta(j, 0) - theta(0, 0));

  Mat fitted = out.output_phases.asDiagonal() * c * out.input_phases.asDiagonal();
  out.residual = (fitted - t).cwiseAbs().maxCoeff();
  return out;
}

namespace {

// Hermitian h with S = exp(i h); eigenphases on the principal branch.
Mat passive_generator(const ScatteringMatrix& s) {
  if (s.unitarity_defect() > 1e-10) {
    throw std::invalid_argument("lift_to_fock: scattering matrix is not unitary");
  }
  Eigen::ComplexSchur<Mat> schur(s.entries);
  const Mat& q = schur.matrixU();
  const Mat& t = schur.matrixT();
  const int k = s.size();
  Eigen::VectorXd phases(k);
  for (int j = 0; j < k; ++j) phases(j) = std::arg(t(j, j));
  // A unitary matrix is normal, so T is diagonal up to roundoff.
  return q * phases.asDiagonal() * q.adjoint();
}

}  // namespace

ModeOperator lift_to_fock(const ScatteringMatrix& s, const std::vector<int>& cutoffs) {
  const int ports = s.size();
  if (static_cast<int>(cutoffs.size()) != ports) {
    throw std::invalid_argument("lift_to_fock: cutoff count must match port count");
  }
  const int dim = product_dim(cutoffs);
  const Mat h = passive_generator(s);

  // Quadratic generator sum_kl h_kl a_k^dag a_l on the product basis.
  Mat gen = Mat::Zero(dim, dim);
  const auto strides = detail::strides_for(cutoffs);
  std::vector<int> digits(cutoffs.size());
  for (int idx = 0; idx < dim; ++idx) {
    int rem = idx;
    for (std::size_t m = 0; m < cutoffs.size(); ++m) {
      digits[m] = static_cast<int>(rem / strides[m]);
      rem = static_cast<int>(rem % strides[m]);
    }
    for (int k = 0; k < ports; ++k) {
      for (int l = 0; l < ports; ++l) {
        if (k == l) {
          gen(idx, idx) += h(k, k) * static_cast<double>(digits[k]);
        } else if (digits[l] >= 1 && digits[k] + 1 < cutoffs[k]) {
          const int target = idx + static_cast<int>(strides[k]) - static_cast<int>(strides[l]);
          const double amp = std::sqrt(static_cast<double>(digits[l]) *
                                       static_cast<double>(digits[k] + 1));
          gen(target, idx) += h(k, l) * amp;
        }
      }
    }
  }
  return {cutoffs, matrix_exponential(Complex(0.0, 1.0) * gen), false};
}

void apply_element(FockVector& psi, const Element& e) {
  const auto& cutoffs = psi.cutoffs;
  const int modes = psi.num_modes();
  if (e.mode_a < 0 || e.mode_a >= modes || e.mode_b < 0 || e.mode_b >= modes) {
    throw std::invalid_argument("apply_element: mode out of range");
  }
  const auto strides = detail::strides_for(cutoffs);

  if (e.kind == Element::Kind::PhaseShifter) {
    const int m = e.mode_a;
    std::vector<Complex> phase(cutoffs[m]);
    for (int n = 0; n < cutoffs[m]; ++n) phase[n] = std::polar(1.0, e.value * n);
    for (int idx = 0; idx < psi.dim(); ++idx) {
      const int n = static_cast<int>((idx / strides[m]) % cutoffs[m]);
      psi.amplitudes(idx) *= phase[n];
    }
    return;
  }

  const int pa = e.mode_a, pb = e.mode_b;
  const std::vector<int> pair_cut{cutoffs[pa], cutoffs[pb]};
  const ModeOperator u2 = lift_to_fock(beamsplitter_matrix(e.value), pair_cut);
  const int pdim = u2.dim();

  std::vector<int> rest;
  for (int m = 0; m < modes; ++m) {
    if (m != pa && m != pb) rest.push_back(m);
  }
  const auto rest_off = rest.empty() ? std::vector<std::ptrdiff_t>{0}
                                     : detail::subspace_offsets(cutoffs, strides, rest);
  const auto pair_off = detail::subspace_offsets(cutoffs, strides, {pa, pb});

  Vec slab(pdim);
  for (std::ptrdiff_t base : rest_off) {
    for (int i = 0; i < pdim; ++i) slab(i) = psi.amplitudes(base + pair_off[i]);
    Vec mixed = u2.matrix * slab;
    for (int i = 0; i < pdim; ++i) psi.amplitudes(base + pair_off[i]) = mixed(i);
  }
}

void apply_sequence(FockVector& psi, const ElementSequence& seq) {
  for (const Element& e : seq.elements) apply_element(psi, e);
}

}  // namespace twophoto
