#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "twophoto/fock.hpp"
#include "twophoto/linopt.hpp"
#include "twophoto/photodet.hpp"
#include "twophoto/stats.hpp"

namespace twophoto {

enum class Scheme { EightPort, SixPort, Heterodyne };
enum class Backend { CoherentExact, FockTruncated };

const char* to_string(Scheme s);
const char* to_string(Backend b);

struct StateSpec {
  enum class Kind { Coherent, Fock, Density };
  Kind kind = Kind::Coherent;
  Complex amplitude{0.0, 0.0};
  int photon_number = 0;
  std::shared_ptr<const DensityOperator> density;

  static StateSpec vacuum() { return {}; }
  static StateSpec coherent(Complex a) { return {Kind::Coherent, a, 0, nullptr}; }
  static StateSpec fock(int n) { return {Kind::Fock, {}, n, nullptr}; }
  static StateSpec from_density(DensityOperator rho);

  bool is_coherent() const { return kind == Kind::Coherent; }
  bool is_vacuum() const { return kind == Kind::Coherent && amplitude == Complex(0.0, 0.0); }
  FockVector to_fock_vector(int cutoff) const;   // pure kinds only
  DensityOperator to_density(int cutoff) const;
  double mean_photons() const;
  bool same_physics(const StateSpec& other) const;
};

/// One experiment. The measured complex photocurrent is calibrated so that
/// for a coherent signal alpha and coherent idler beta the sample mean of
/// z1 + i z2 is alpha + conj(beta) (the device observable a + b^dag),
/// rotated by exp(-i lo_phase) when a local-oscillator phase is set.
struct SchemeConfig {
  Scheme scheme = Scheme::EightPort;
  Backend backend = Backend::CoherentExact;
  StateSpec signal = StateSpec::vacuum();
  StateSpec idler = StateSpec::vacuum();
  double lo_magnitude = 1e4;
  double lo_phase = 0.0;
  double eta = 1.0;
  double heterodyne_mixing = 100.0;  // k = |z| sqrt(1 - tau), heterodyne only
  int cutoff = 0;                    // uniform per-mode cutoff, 0 = auto (FockTruncated)
  std::size_t sample_count = 100000;
  std::uint64_t seed = 1;
  std::uint64_t stream_offset = 0;   // shifts the RNG stream space
  int threads = 1;                   // 0 = hardware concurrency
};

void validate(const SchemeConfig& cfg);

struct PhotocurrentSample {
  std::vector<std::int64_t> counts;  // per detector; empty for heterodyne
  double z1 = 0.0;
  double z2 = 0.0;
};

std::vector<PhotocurrentSample> run_eightport(const SchemeConfig& cfg);
std::vector<PhotocurrentSample> run_sixport(const SchemeConfig& cfg);
std::vector<PhotocurrentSample> run_heterodyne(const SchemeConfig& cfg);
std::vector<PhotocurrentSample> run_scheme(const SchemeConfig& cfg);

std::vector<std::pair<double, double>> to_points(const std::vector<PhotocurrentSample>& samples);

/// Exact (z1, z2) mean and covariance of the CoherentExact model at finite
/// local-oscillator intensity; the infinite-intensity limit of the mean is
/// alpha + conj(beta).
stats::MeanCov coherent_exact_moments(const SchemeConfig& cfg);

/// Discrete 3-point Fourier transform of six-port counts.
std::array<Complex, 3> sixport_fourier(const std::array<double, 3>& counts);

/// Leading-order photocurrent observables reduced to the canonical mode
/// layout signal (x) idler for eta = 1, or signal (x) idler (x) u1 (x) u2
/// for eta < 1, with the two relevant vacuum noise modes obtained from the
/// scheme's physical noise modes by a computed passive relabeling.
struct PhotocurrentOperators {
  ModeOperator Z1;
  ModeOperator Z2;
  Complex signal_coef;       // coefficient of a_signal in Z1 + i Z2
  Complex idler_conj_coef;   // coefficient of a_idler^dag
  double noise_coef = 0.0;   // sqrt((1 - eta) / eta) on u1 + u2^dag
};

/// cutoffs: {signal, idler} for eta = 1, {signal, idler, u, u} otherwise.
PhotocurrentOperators photocurrent_operators(Scheme scheme, Efficiency eta,
                                             const std::vector<int>& cutoffs,
                                             double lo_phase = 0.0);

struct EquivalenceReport {
  bool eta_matched = true;
  double operator_delta = 0.0;  // max-abs gap between the two operator sets
  stats::KsResult ks_z1, ks_z2;
  stats::MeanCov moments_a, moments_b;
  Eigen::Vector2d mean_delta = Eigen::Vector2d::Zero();
  Eigen::Vector2d mean_tolerance = Eigen::Vector2d::Zero();  // 3-sigma band
  double variance_ratio_z1 = 1.0;
  double variance_ratio_z2 = 1.0;
  double expected_variance_ratio = 1.0;  // eta_a / eta_b
  double significance = 0.01;
  bool equivalent = false;
};

/// Statistical comparison of two configurations with matched signal, idler
/// and LO phase. With matched eta the verdict is a two-sample KS test on
/// both marginals plus the operator-level gap; with different eta the
/// means must agree and the variance ratio must follow eta_a / eta_b.
EquivalenceReport equivalence_report(const SchemeConfig& a, const SchemeConfig& b,
                                     double significance = 0.01);

}  // namespace twophoto
