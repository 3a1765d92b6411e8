#pragma once

#include <Eigen/Dense>
#include <vector>

#include "twophoto/fock.hpp"

namespace twophoto {

/// Passive K-port network. entries(k, l) is the transmission amplitude
/// from input port l to output port k, so output amplitudes are S * input.
struct ScatteringMatrix {
  Mat entries;

  int size() const { return static_cast<int>(entries.rows()); }
  double unitarity_defect() const;
};

/// Two-port splitter with |S00|^2 = tau, real convention
/// [[sqrt(tau), sqrt(1-tau)], [-sqrt(1-tau), sqrt(tau)]].
ScatteringMatrix beamsplitter_matrix(double tau);

/// Canonical 4-port coupler, the unitary 4-point discrete Fourier matrix
/// (1/2) [[1,1,1,1],[1,i,-1,-i],[1,-1,1,-1],[1,-i,-1,i]].
ScatteringMatrix eightport_matrix();

/// Symmetric lossless 3-port coupler, the 3-point discrete Fourier matrix
/// (1/sqrt(3)) [[1,1,1],[1,w,w*],[1,w*,w]] with w = exp(i 2 pi / 3).
ScatteringMatrix triple_coupler_matrix();

ScatteringMatrix identity_network(int ports);

struct Element {
  enum class Kind { BeamSplitter, PhaseShifter };
  Kind kind = Kind::BeamSplitter;
  int mode_a = 0;
  int mode_b = 0;      // unused for PhaseShifter
  double value = 0.0;  // transmissivity or angle

  static Element beam_splitter(int a, int b, double tau);
  static Element phase_shifter(int mode, double phi);
};

/// Elements listed in the order light traverses them.
struct ElementSequence {
  std::vector<Element> elements;
  ScatteringMatrix compose(int ports) const;
};

struct TripleCouplerDecomposition {
  ElementSequence sequence;
  Eigen::Vector3cd input_phases;   // diagonal corrections on the input side
  Eigen::Vector3cd output_phases;  // and on the output side
  double residual;                 // max |D_out C D_in - T|
};

/// Four balanced splitters and two shifters realizing the symmetric
/// triple coupler up to external phases; the fitted phases are reported.
TripleCouplerDecomposition triple_coupler_decomposition();

/// Unitary U on the truncated multimode space with U^dag a_k U = sum_l S_kl a_l.
/// Built by exponentiating the quadratic generator of S's matrix logarithm,
/// with eigenphases taken in (-pi, pi].
ModeOperator lift_to_fock(const ScatteringMatrix& s, const std::vector<int>& cutoffs);

/// State-vector application of network elements (mode count from the state).
void apply_element(FockVector& psi, const Element& e);
void apply_sequence(FockVector& psi, const ElementSequence& seq);

}  // namespace twophoto
