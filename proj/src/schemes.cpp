#include "twophoto/schemes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "twophoto/detail/indexing.hpp"

namespace twophoto {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::EightPort: return "eightport";
    case Scheme::SixPort: return "sixport";
    case Scheme::Heterodyne: return "heterodyne";
  }
  return "?";
}

const char* to_string(Backend b) {
  return b == Backend::CoherentExact ? "coherent-exact" : "fock-truncated";
}

StateSpec StateSpec::from_density(DensityOperator rho) {
  if (rho.num_modes() != 1) throw std::invalid_argument("StateSpec: density must be single-mode");
  StateSpec s;
  s.kind = Kind::Density;
  s.density = std::make_shared<DensityOperator>(std::move(rho));
  return s;
}

FockVector StateSpec::to_fock_vector(int cutoff) const {
  switch (kind) {
    case Kind::Coherent: return coherent_vector(amplitude, cutoff);
    case Kind::Fock: return fock_state(photon_number, cutoff);
    case Kind::Density: break;
  }
  throw std::invalid_argument("StateSpec: density state has no pure vector form");
}

DensityOperator StateSpec::to_density(int cutoff) const {
  if (kind == Kind::Density) {
    const int d = density->dim();
    if (d == cutoff) return *density;
    if (d > cutoff) throw std::invalid_argument("StateSpec: cutoff below stored density dimension");
    Mat m = Mat::Zero(cutoff, cutoff);
    m.topLeftCorner(d, d) = density->matrix;
    return {{cutoff}, std::move(m)};
  }
  return DensityOperator::from_pure(to_fock_vector(cutoff));
}

double StateSpec::mean_photons() const {
  switch (kind) {
    case Kind::Coherent: return std::norm(amplitude);
    case Kind::Fock: return static_cast<double>(photon_number);
    case Kind::Density: {
      double m = 0.0;
      for (int n = 0; n < density->dim(); ++n) m += n * density->matrix(n, n).real();
      return m;
    }
  }
  return 0.0;
}

bool StateSpec::same_physics(const StateSpec& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::Coherent: return amplitude == other.amplitude;
    case Kind::Fock: return photon_number == other.photon_number;
    case Kind::Density:
      return density->dim() == other.density->dim() &&
             (density->matrix - other.density->matrix).cwiseAbs().maxCoeff() <= 1e-12;
  }
  return false;
}

void validate(const SchemeConfig& cfg) {
  Efficiency eta_check(cfg.eta);
  if (!(cfg.lo_magnitude > 0.0)) {
    throw std::invalid_argument("config: lo_magnitude must be positive");
  }
  if (cfg.sample_count == 0) throw std::invalid_argument("config: sample_count must be >= 1");
  if (cfg.scheme == Scheme::Heterodyne) {
    if (cfg.backend != Backend::CoherentExact) {
      throw std::invalid_argument(
          "config: the heterodyne beat observable is not number-basis diagonal; "
          "only the coherent-exact backend supports it");
    }
    if (!(cfg.heterodyne_mixing > 0.0) || cfg.heterodyne_mixing >= cfg.lo_magnitude) {
      throw std::invalid_argument("config: heterodyne mixing k must satisfy 0 < k < lo_magnitude");
    }
  }
  if (cfg.backend == Backend::CoherentExact) {
    if (!cfg.signal.is_coherent() || !cfg.idler.is_coherent()) {
      throw std::invalid_argument("config: coherent-exact backend requires coherent signal and idler");
    }
  } else if (cfg.cutoff != 0) {
    if (cfg.cutoff < 2) throw std::invalid_argument("config: cutoff must be >= 2");
    const double z = cfg.lo_magnitude;
    if (z * z + 6.0 * z >= static_cast<double>(cfg.cutoff)) {
      throw std::invalid_argument("config: cutoff too small for the local oscillator intensity");
    }
  }
}

namespace {

struct CountingLayout {
  Mat s;
  int signal_port, idler_port, lo_port;
  std::vector<int> vacuum_ports;
  Eigen::VectorXd w1, w2;  // z_i = w_i . counts / (eta |z|)
};

// Canonical 4-port coupler read as a double homodyne: signal and idler feed
// ports 0 and 2, which the detector pairs (1,3) and (4,2) resolve cleanly;
// port 1 stays unexcited and drops out of both difference currents.
const CountingLayout& eightport_layout() {
  static const CountingLayout layout = [] {
    CountingLayout l;
    l.s = eightport_matrix().entries;
    l.signal_port = 0;
    l.idler_port = 2;
    l.lo_port = 3;
    l.vacuum_ports = {1};
    l.w1 = Eigen::Vector4d(1, 0, -1, 0);
    l.w2 = Eigen::Vector4d(0, -1, 0, 1);
    return l;
  }();
  return layout;
}

// Symmetric triple coupler with the discrete Fourier post-processing folded
// into real detector weights: z1 + i z2 = sqrt(3) (I_2-component) / (eta |z|).
const CountingLayout& sixport_layout() {
  static const CountingLayout layout = [] {
    CountingLayout l;
    l.s = triple_coupler_matrix().entries;
    l.signal_port = 0;
    l.idler_port = 2;
    l.lo_port = 1;
    l.w1 = Eigen::Vector3d(1.0, -0.5, -0.5);
    l.w2 = Eigen::Vector3d(0.0, std::sqrt(3.0) / 2.0, -std::sqrt(3.0) / 2.0);
    return l;
  }();
  return layout;
}

const CountingLayout& layout_for(Scheme s) {
  return s == Scheme::EightPort ? eightport_layout() : sixport_layout();
}

Vec input_amplitudes(const CountingLayout& l, const SchemeConfig& cfg) {
  Vec in = Vec::Zero(l.s.rows());
  in(l.signal_port) = cfg.signal.amplitude;
  in(l.idler_port) = cfg.idler.amplitude;
  in(l.lo_port) = std::polar(cfg.lo_magnitude, cfg.lo_phase);
  return in;
}

template <typename PerSample>
std::vector<PhotocurrentSample> sample_chunked(const SchemeConfig& cfg, PerSample per_sample) {
  const std::size_t n = cfg.sample_count;
  std::vector<PhotocurrentSample> out(n);
  constexpr std::size_t kChunk = 8192;
  const std::size_t num_chunks = (n + kChunk - 1) / kChunk;
  int threads = cfg.threads == 0
                    ? static_cast<int>(std::thread::hardware_concurrency())
                    : cfg.threads;
  threads = std::clamp(threads, 1, 64);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t c = next.fetch_add(1);
      if (c >= num_chunks) break;
      RngStream rng(cfg.seed, cfg.stream_offset + c);
      const std::size_t begin = c * kChunk;
      const std::size_t end = std::min(n, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) out[i] = per_sample(rng);
    }
  };
  if (threads <= 1 || num_chunks <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int used = std::min<int>(threads, static_cast<int>(num_chunks));
    pool.reserve(used);
    for (int t = 0; t < used; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

int poisson_quantile_cutoff(double lambda, double tail) {
  if (lambda <= 0.0) return 2;
  int m = std::max(2, static_cast<int>(lambda));
  while (m < 100000 && stats::lower_regularized_gamma(m, lambda) > tail) ++m;
  return m;
}

struct PureComponent {
  double weight;
  std::vector<FockVector> factors;  // one per circuit mode
};

// Decompose a mode's state into weighted pure vectors at the working cutoff.
std::vector<std::pair<double, FockVector>> pure_components(const StateSpec& spec, int cutoff) {
  if (spec.kind != StateSpec::Kind::Density) {
    return {{1.0, spec.to_fock_vector(cutoff)}};
  }
  const DensityOperator rho = spec.to_density(cutoff);
  Eigen::SelfAdjointEigenSolver<Mat> es((rho.matrix + rho.matrix.adjoint()) / 2.0);
  std::vector<std::pair<double, FockVector>> out;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double w = es.eigenvalues()(i);
    if (w > 1e-14) out.push_back({w, FockVector{{cutoff}, es.eigenvectors().col(i)}});
  }
  return out;
}

// Joint ideal-count probabilities for a counting scheme on the truncated
// Fock backend: evolve each pure input component through the element
// circuit, accumulate |amplitude|^2.
struct FockCountEngine {
  std::vector<int> cutoffs;
  std::vector<double> cdf;
  double deficit = 0.0;
  std::vector<std::ptrdiff_t> strides;

  void decode(std::size_t index, std::vector<std::int64_t>& digits) const {
    for (std::size_t m = 0; m < cutoffs.size(); ++m) {
      digits[m] = static_cast<std::int64_t>(index / strides[m]) % cutoffs[m];
    }
  }
};

FockCountEngine build_fock_engine(const SchemeConfig& cfg) {
  const bool eight = cfg.scheme == Scheme::EightPort;

  double lambda = std::norm(std::polar(cfg.lo_magnitude, cfg.lo_phase));
  int extra = 0;
  for (const StateSpec* s : {&cfg.signal, &cfg.idler}) {
    if (s->kind == StateSpec::Kind::Coherent) {
      lambda += std::norm(s->amplitude);
    } else if (s->kind == StateSpec::Kind::Fock) {
      extra += s->photon_number;
    } else {
      extra += s->density->dim() - 1;
    }
  }
  int cutoff = cfg.cutoff != 0 ? cfg.cutoff : poisson_quantile_cutoff(lambda, 1e-7) + extra;
  cutoff = std::max(cutoff, 2);

  const int modes = eight ? 4 : 3;
  std::vector<int> cutoffs(modes, cutoff);
  product_dim(cutoffs);

  // Circuit mode packing: eight-port (signal, idler, unexcited, LO) feeding
  // the four-splitter double homodyne; six-port (signal, LO, idler) feeding
  // the decomposed triple coupler with its fitted input phases.
  ElementSequence circuit;
  std::vector<StateSpec> packing;
  const StateSpec lo = StateSpec::coherent(std::polar(cfg.lo_magnitude, cfg.lo_phase));
  if (eight) {
    packing = {cfg.signal, cfg.idler, StateSpec::vacuum(), lo};
    circuit.elements = {
        Element::beam_splitter(0, 1, 0.5), Element::beam_splitter(2, 3, 0.5),
        Element::phase_shifter(3, M_PI / 2.0), Element::beam_splitter(0, 2, 0.5),
        Element::beam_splitter(1, 3, 0.5),
    };
  } else {
    packing = {cfg.signal, lo, cfg.idler};
    const TripleCouplerDecomposition dec = triple_coupler_decomposition();
    for (int m = 0; m < 3; ++m) {
      circuit.elements.push_back(Element::phase_shifter(m, std::arg(dec.input_phases(m))));
    }
    circuit.elements.insert(circuit.elements.end(), dec.sequence.elements.begin(),
                            dec.sequence.elements.end());
  }

  // Cartesian product of per-mode pure components.
  std::vector<std::vector<std::pair<double, FockVector>>> per_mode;
  for (int m = 0; m < modes; ++m) per_mode.push_back(pure_components(packing[m], cutoff));

  FockCountEngine engine;
  engine.cutoffs = cutoffs;
  engine.strides = detail::strides_for(cutoffs);
  const std::size_t dim = static_cast<std::size_t>(product_dim(cutoffs));
  std::vector<double> probs(dim, 0.0);

  std::vector<std::size_t> pick(modes, 0);
  while (true) {
    double weight = 1.0;
    std::vector<FockVector> factors;
    for (int m = 0; m < modes; ++m) {
      weight *= per_mode[m][pick[m]].first;
      factors.push_back(per_mode[m][pick[m]].second);
    }
    FockVector psi = tensor(factors);
    apply_sequence(psi, circuit);
    for (std::size_t i = 0; i < dim; ++i) probs[i] += weight * std::norm(psi.amplitudes(i));

    int m = modes - 1;
    while (m >= 0 && ++pick[m] == per_mode[m].size()) pick[m--] = 0;
    if (m < 0) break;
  }

  engine.cdf.resize(dim);
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    acc += probs[i];
    engine.cdf[i] = acc;
  }
  engine.deficit = std::max(0.0, 1.0 - acc);
  if (engine.deficit > 1e-6) {
    throw std::invalid_argument("fock backend: truncation deficit " +
                                std::to_string(engine.deficit) +
                                " above 1e-6; increase the cutoff");
  }
  return engine;
}

std::vector<PhotocurrentSample> run_counting(const SchemeConfig& cfg) {
  const CountingLayout& layout = layout_for(cfg.scheme);
  const double rescale = 1.0 / (cfg.eta * cfg.lo_magnitude);
  const int detectors = static_cast<int>(layout.s.rows());

  auto finish = [&](PhotocurrentSample& out) {
    double z1 = 0.0, z2 = 0.0;
    for (int k = 0; k < detectors; ++k) {
      z1 += layout.w1(k) * static_cast<double>(out.counts[k]);
      z2 += layout.w2(k) * static_cast<double>(out.counts[k]);
    }
    out.z1 = z1 * rescale;
    out.z2 = z2 * rescale;
  };

  if (cfg.backend == Backend::CoherentExact) {
    const Vec outs = layout.s * input_amplitudes(layout, cfg);
    std::vector<double> means(detectors);
    for (int k = 0; k < detectors; ++k) means[k] = cfg.eta * std::norm(outs(k));
    return sample_chunked(cfg, [&](RngStream& rng) {
      PhotocurrentSample out;
      out.counts.resize(detectors);
      for (int k = 0; k < detectors; ++k) out.counts[k] = rng.poisson(means[k]);
      finish(out);
      return out;
    });
  }

  const FockCountEngine engine = build_fock_engine(cfg);
  const double total = engine.cdf.back();
  return sample_chunked(cfg, [&](RngStream& rng) {
    PhotocurrentSample out;
    const double u = rng.uniform() * total;
    const auto it = std::lower_bound(engine.cdf.begin(), engine.cdf.end(), u);
    std::vector<std::int64_t> ideal(engine.cutoffs.size());
    engine.decode(static_cast<std::size_t>(it - engine.cdf.begin()), ideal);
    out.counts.resize(detectors);
    for (int k = 0; k < detectors; ++k) {
      // Circuit mode k feeds detector k; loss thins each count binomially.
      out.counts[k] = cfg.eta == 1.0 ? ideal[k] : rng.binomial(ideal[k], cfg.eta);
    }
    finish(out);
    return out;
  });
}

struct HeterodyneModel {
  double mean1, mean2;    // (z1, z2) means
  double l11, l21, l22;   // Cholesky factor of the (z1, z2) covariance
};

// Demodulated photocount statistics of the beat between a bright detuned
// reference and the signal/image pair, mixed on a high-transmissivity
// splitter. The window is one inverse transmissivity long with an integer
// number of beat periods, which makes the quadrature estimate unbiased and
// pins the vacuum variance at 1/(2 eta).
HeterodyneModel heterodyne_model(const SchemeConfig& cfg) {
  const double zmag = cfg.lo_magnitude;
  const double k = cfg.heterodyne_mixing;
  const double tau = 1.0 - (k / zmag) * (k / zmag);
  const double eta = cfg.eta;

  const Complex a_sig = std::sqrt(eta * tau) * cfg.signal.amplitude;
  const Complex a_ref = std::sqrt(eta * (1.0 - tau)) * std::polar(zmag, cfg.lo_phase);
  const Complex a_img = std::sqrt(eta * tau) * cfg.idler.amplitude;

  const double dc = std::norm(a_sig) + std::norm(a_ref) + std::norm(a_img);
  const Complex beat = a_sig * std::conj(a_ref) + a_ref * std::conj(a_img);
  const Complex image_beat = a_sig * std::conj(a_img);  // twice the beat frequency

  const double window = 1.0 / tau;
  const double rescale = eta * zmag * std::sqrt(tau * (1.0 - tau));
  const double denom = window * rescale;

  HeterodyneModel m;
  m.mean1 = beat.real() / rescale;
  m.mean2 = beat.imag() / rescale;
  const double v1 = window * (dc + image_beat.real()) / 2.0 / (denom * denom);
  const double v2 = window * (dc - image_beat.real()) / 2.0 / (denom * denom);
  const double cov = window * image_beat.imag() / 2.0 / (denom * denom);
  m.l11 = std::sqrt(v1);
  m.l21 = cov / m.l11;
  m.l22 = std::sqrt(std::max(0.0, v2 - m.l21 * m.l21));
  return m;
}

}  // namespace

std::vector<PhotocurrentSample> run_eightport(const SchemeConfig& cfg) {
  if (cfg.scheme != Scheme::EightPort) throw std::invalid_argument("run_eightport: wrong scheme");
  validate(cfg);
  return run_counting(cfg);
}

std::vector<PhotocurrentSample> run_sixport(const SchemeConfig& cfg) {
  if (cfg.scheme != Scheme::SixPort) throw std::invalid_argument("run_sixport: wrong scheme");
  validate(cfg);
  return run_counting(cfg);
}

std::vector<PhotocurrentSample> run_heterodyne(const SchemeConfig& cfg) {
  if (cfg.scheme != Scheme::Heterodyne) throw std::invalid_argument("run_heterodyne: wrong scheme");
  validate(cfg);
  const HeterodyneModel model = heterodyne_model(cfg);
  return sample_chunked(cfg, [&](RngStream& rng) {
    PhotocurrentSample out;
    const double g1 = rng.normal();
    const double g2 = rng.normal();
    out.z1 = model.mean1 + model.l11 * g1;
    out.z2 = model.mean2 + model.l21 * g1 + model.l22 * g2;
    return out;
  });
}

std::vector<PhotocurrentSample> run_scheme(const SchemeConfig& cfg) {
  switch (cfg.scheme) {
    case Scheme::EightPort: return run_eightport(cfg);
    case Scheme::SixPort: return run_sixport(cfg);
    case Scheme::Heterodyne: return run_heterodyne(cfg);
  }
  throw std::invalid_argument("run_scheme: unknown scheme");
}

std::vector<std::pair<double, double>> to_points(const std::vector<PhotocurrentSample>& samples) {
  std::vector<std::pair<double, double>> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = {samples[i].z1, samples[i].z2};
  return out;
}

stats::MeanCov coherent_exact_moments(const SchemeConfig& cfg) {
  validate(cfg);
  if (cfg.backend != Backend::CoherentExact) {
    throw std::invalid_argument("coherent_exact_moments: coherent-exact backend only");
  }
  stats::MeanCov mc;
  mc.n = cfg.sample_count;
  if (cfg.scheme == Scheme::Heterodyne) {
    const HeterodyneModel m = heterodyne_model(cfg);
    mc.mean << m.mean1, m.mean2;
    const double v1 = m.l11 * m.l11;
    const double cov = m.l21 * m.l11;
    const double v2 = m.l21 * m.l21 + m.l22 * m.l22;
    mc.cov << v1, cov, cov, v2;
    return mc;
  }
  const CountingLayout& layout = layout_for(cfg.scheme);
  const Vec outs = layout.s * input_amplitudes(layout, cfg);
  const int detectors = static_cast<int>(layout.s.rows());
  const double r = 1.0 / (cfg.eta * cfg.lo_magnitude);
  double m1 = 0, m2 = 0, v1 = 0, v2 = 0, cv = 0;
  for (int k = 0; k < detectors; ++k) {
    const double mean_k = cfg.eta * std::norm(outs(k));
    m1 += layout.w1(k) * mean_k;
    m2 += layout.w2(k) * mean_k;
    v1 += layout.w1(k) * layout.w1(k) * mean_k;
    v2 += layout.w2(k) * layout.w2(k) * mean_k;
    cv += layout.w1(k) * layout.w2(k) * mean_k;
  }
  mc.mean << m1 * r, m2 * r;
  mc.cov << v1 * r * r, cv * r * r, cv * r * r, v2 * r * r;
  return mc;
}

std::array<Complex, 3> sixport_fourier(const std::array<double, 3>& counts) {
  std::array<Complex, 3> out;
  for (int s = 0; s < 3; ++s) {
    Complex acc = 0.0;
    for (int n = 0; n < 3; ++n) {
      const double theta_n = 2.0 * M_PI * n / 3.0;
      acc += counts[n] * std::polar(1.0, -theta_n * s);
    }
    out[s] = acc / std::sqrt(3.0);
  }
  return out;
}

namespace {

struct ReducedForm {
  Complex sig_a{}, sig_adag{}, idl_a{}, idl_adag{};
  Eigen::VectorXcd u_a, u_adag;  // one physical noise mode per detector
  double vacuum_residual = 0.0;  // leftover weight on unexcited ports
};

// Leading-order linear form of Z1 + i Z2 in the bright-reference limit of a
// counting scheme: the difference-current coefficients come straight from
// the network matrix, the noise terms from the per-detector loss model.
ReducedForm counting_form(const CountingLayout& l, double eta, double theta) {
  const int detectors = static_cast<int>(l.s.rows());
  const Complex phase = std::polar(1.0, theta);
  const double g = eta < 1.0 ? std::sqrt((1.0 - eta) / eta) : 0.0;

  ReducedForm form;
  form.u_a = Eigen::VectorXcd::Zero(detectors);
  form.u_adag = Eigen::VectorXcd::Zero(detectors);

  for (int port = 0; port < detectors; ++port) {
    if (port == l.lo_port) continue;
    Complex d1 = 0.0, d2 = 0.0;
    for (int k = 0; k < detectors; ++k) {
      const Complex cross = std::conj(l.s(k, port)) * l.s(k, l.lo_port);
      d1 += l.w1(k) * cross;
      d2 += l.w2(k) * cross;
    }
    const Complex adag = phase * (d1 + Complex(0, 1) * d2);
    const Complex a = std::conj(phase * d1) + Complex(0, 1) * std::conj(phase * d2);
    if (port == l.signal_port) {
      form.sig_adag = adag;
      form.sig_a = a;
    } else if (port == l.idler_port) {
      form.idl_adag = adag;
      form.idl_a = a;
    } else {
      form.vacuum_residual = std::max({form.vacuum_residual, std::abs(adag), std::abs(a)});
    }
  }
  for (int k = 0; k < detectors; ++k) {
    const Complex c = phase * g * l.s(k, l.lo_port);
    const Complex wk = l.w1(k) + Complex(0, 1) * l.w2(k);
    form.u_adag(k) = wk * c;
    form.u_a(k) = wk * std::conj(c);
  }
  return form;
}

ReducedForm heterodyne_form(double eta, double theta) {
  const Complex phase = std::polar(1.0, theta);
  const double g = eta < 1.0 ? std::sqrt((1.0 - eta) / eta) : 0.0;
  ReducedForm form;
  form.sig_a = std::conj(phase);
  form.idl_adag = phase;
  form.u_a = Eigen::VectorXcd::Zero(2);
  form.u_adag = Eigen::VectorXcd::Zero(2);
  form.u_a(0) = std::conj(phase) * g;
  form.u_adag(1) = phase * g;
  return form;
}

}  // namespace

PhotocurrentOperators photocurrent_operators(Scheme scheme, Efficiency eta,
                                             const std::vector<int>& cutoffs,
                                             double lo_phase) {
  const double e = eta.value();
  const bool lossy = e < 1.0;
  if ((lossy && cutoffs.size() != 4) || (!lossy && cutoffs.size() != 2)) {
    throw std::invalid_argument(
        "photocurrent_operators: need cutoffs {signal, idler} for eta = 1 or "
        "{signal, idler, u, u} for eta < 1");
  }

  const ReducedForm form = scheme == Scheme::Heterodyne
                               ? heterodyne_form(e, lo_phase)
                               : counting_form(layout_for(scheme), e, lo_phase);
  if (form.vacuum_residual > 1e-12) {
    throw std::logic_error("photocurrent_operators: unexcited port failed to cancel");
  }
  if (std::abs(form.sig_adag) > 1e-12 || std::abs(form.idl_a) > 1e-12) {
    throw std::logic_error("photocurrent_operators: reduction is not of the a + b^dag form");
  }

  // The physical vacuum modes enter only через two combinations; relabel to
  // the canonical pair. Both must carry the same weight and be orthogonal,
  // which the passive network guarantees.
  double g = form.u_adag.norm();
  if (lossy) {
    const double ga = form.u_a.norm();
    if (std::abs(ga - g) > 1e-12 * std::max(1.0, g)) {
      throw std::logic_error("photocurrent_operators: unbalanced noise weights");
    }
    Complex overlap = 0.0;
    for (int k = 0; k < form.u_a.size(); ++k) {
      overlap += std::conj(form.u_a(k)) * std::conj(form.u_adag(k));
    }
    if (std::abs(overlap) > 1e-12 * std::max(1.0, g * g)) {
      throw std::logic_error("photocurrent_operators: noise modes fail to decouple");
    }
  } else {
    g = 0.0;
  }

  PhotocurrentOperators out;
  out.signal_coef = form.sig_a;
  out.idler_conj_coef = form.idl_adag;
  out.noise_coef = g;

  ModeOperator z = embed(annihilation(cutoffs[0]), cutoffs, 0);
  z.matrix *= form.sig_a;
  z.matrix += form.idl_adag * embed(creation(cutoffs[1]), cutoffs, 1).matrix;
  if (lossy) {
    z.matrix += g * embed(annihilation(cutoffs[2]), cutoffs, 2).matrix;
    z.matrix += g * embed(creation(cutoffs[3]), cutoffs, 3).matrix;
  }
  out.Z1 = ModeOperator{cutoffs, (z.matrix + z.matrix.adjoint()) / 2.0, true};
  out.Z2 = ModeOperator{cutoffs, (z.matrix - z.matrix.adjoint()) / Complex(0.0, 2.0), true};
  return out;
}

EquivalenceReport equivalence_report(const SchemeConfig& a, const SchemeConfig& b,
                                     double significance) {
  validate(a);
  validate(b);
  if (!a.signal.same_physics(b.signal) || !a.idler.same_physics(b.idler)) {
    throw std::invalid_argument("equivalence_report: signal/idler states differ");
  }
  if (a.lo_phase != b.lo_phase) {
    throw std::invalid_argument("equivalence_report: LO phases differ");
  }

  EquivalenceReport report;
  report.significance = significance;
  report.eta_matched = a.eta == b.eta;

  SchemeConfig cfg_b = b;
  if (a.seed == b.seed && a.stream_offset == b.stream_offset) {
    cfg_b.stream_offset += (1ULL << 32);  // keep the two runs independent
  }
  auto samples_a = run_scheme(a);
  auto samples_b = run_scheme(cfg_b);
  report.moments_a = stats::mean_covariance(to_points(samples_a));
  report.moments_b = stats::mean_covariance(to_points(samples_b));

  report.mean_delta = report.moments_a.mean - report.moments_b.mean;
  for (int i = 0; i < 2; ++i) {
    report.mean_tolerance(i) =
        3.0 * std::sqrt(report.moments_a.cov(i, i) / static_cast<double>(samples_a.size()) +
                        report.moments_b.cov(i, i) / static_cast<double>(samples_b.size()));
  }
  report.variance_ratio_z1 = report.moments_b.cov(0, 0) / report.moments_a.cov(0, 0);
  report.variance_ratio_z2 = report.moments_b.cov(1, 1) / report.moments_a.cov(1, 1);
  report.expected_variance_ratio = a.eta / b.eta;

  if (report.eta_matched) {
    std::vector<double> a1, a2, b1, b2;
    a1.reserve(samples_a.size());
    a2.reserve(samples_a.size());
    for (const auto& s : samples_a) {
      a1.push_back(s.z1);
      a2.push_back(s.z2);
    }
    b1.reserve(samples_b.size());
    b2.reserve(samples_b.size());
    for (const auto& s : samples_b) {
      b1.push_back(s.z1);
      b2.push_back(s.z2);
    }
    report.ks_z1 = stats::ks_two_sample(std::move(a1), std::move(b1));
    report.ks_z2 = stats::ks_two_sample(std::move(a2), std::move(b2));

    std::vector<int> cutoffs = a.eta < 1.0 ? std::vector<int>{6, 6, 4, 4}
                                           : std::vector<int>{6, 6};
    const auto ops_a = photocurrent_operators(a.scheme, Efficiency(a.eta), cutoffs, a.lo_phase);
    const auto ops_b = photocurrent_operators(b.scheme, Efficiency(b.eta), cutoffs, b.lo_phase);
    report.operator_delta =
        std::max((ops_a.Z1.matrix - ops_b.Z1.matrix).cwiseAbs().maxCoeff(),
                 (ops_a.Z2.matrix - ops_b.Z2.matrix).cwiseAbs().maxCoeff());
    report.equivalent = report.ks_z1.p_value > significance &&
                        report.ks_z2.p_value > significance &&
                        report.operator_delta <= 1e-10;
  } else {
    const bool means_ok = std::abs(report.mean_delta(0)) <= report.mean_tolerance(0) &&
                          std::abs(report.mean_delta(1)) <= report.mean_tolerance(1);
    const double rel1 =
        std::abs(report.variance_ratio_z1 - report.expected_variance_ratio) /
        report.expected_variance_ratio;
    const double rel2 =
        std::abs(report.variance_ratio_z2 - report.expected_variance_ratio) /
        report.expected_variance_ratio;
    report.equivalent = means_ok && rel1 <= 0.05 && rel2 <= 0.05;
  }
  return report;
}

}  // namespace twophoto
