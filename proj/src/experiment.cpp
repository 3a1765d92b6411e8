#include "twophoto/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace twophoto::experiment {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

namespace {

const json& require_field(const json& j, const std::string& key, const std::string& prefix) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(prefix.empty() ? key : prefix + "." + key, "missing required field");
  }
  return j.at(key);
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

Complex as_complex(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(field, "expected [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

DensityOperator load_density_file(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open density file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(field, std::string("density file is not valid JSON: ") + e.what());
  }
  if (j.contains("populations")) {
    const auto& pops = j.at("populations");
    if (!pops.is_array() || pops.empty()) throw ConfigError(field, "populations must be an array");
    Eigen::VectorXd v(pops.size());
    for (std::size_t i = 0; i < pops.size(); ++i) v(i) = pops[i].get<double>();
    return DensityOperator::diagonal(v);
  }
  if (j.contains("matrix_re") && j.contains("matrix_im")) {
    const auto& re = j.at("matrix_re");
    const auto& im = j.at("matrix_im");
    const std::size_t n = re.size();
    if (n == 0 || im.size() != n) throw ConfigError(field, "matrix_re/matrix_im shape mismatch");
    Mat m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      if (re[r].size() != n || im[r].size() != n) throw ConfigError(field, "matrix rows must be square");
      for (std::size_t c = 0; c < n; ++c) {
        m(r, c) = Complex(re[r][c].get<double>(), im[r][c].get<double>());
      }
    }
    return {{static_cast<int>(n)}, std::move(m)};
  }
  throw ConfigError(field, "density file needs 'populations' or 'matrix_re'/'matrix_im'");
}

Scheme parse_scheme_name(const json& j, const std::string& field) {
  const std::string s = j.is_string() ? j.get<std::string>() : "";
  if (s == "eightport") return Scheme::EightPort;
  if (s == "sixport") return Scheme::SixPort;
  if (s == "heterodyne") return Scheme::Heterodyne;
  throw ConfigError(field, "expected one of eightport | sixport | heterodyne");
}

Backend parse_backend_name(const json& j, const std::string& field) {
  const std::string s = j.is_string() ? j.get<std::string>() : "";
  if (s == "coherent-exact") return Backend::CoherentExact;
  if (s == "fock-truncated") return Backend::FockTruncated;
  throw ConfigError(field, "expected coherent-exact | fock-truncated");
}

json state_to_json(const StateSpec& s) {
  switch (s.kind) {
    case StateSpec::Kind::Coherent:
      if (s.is_vacuum()) return {{"kind", "vacuum"}};
      return {{"kind", "coherent"}, {"amplitude", {s.amplitude.real(), s.amplitude.imag()}}};
    case StateSpec::Kind::Fock:
      return {{"kind", "fock"}, {"n", s.photon_number}};
    case StateSpec::Kind::Density:
      return {{"kind", "density"}, {"dim", s.density->dim()}};
  }
  return {};
}

json moments_to_json(const stats::MeanCov& m) {
  return {{"mean", {m.mean(0), m.mean(1)}},
          {"covariance",
           {{m.cov(0, 0), m.cov(0, 1)}, {m.cov(1, 0), m.cov(1, 1)}}},
          {"n", m.n}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace

StateSpec parse_state_spec(const json& j, const std::string& field) {
  if (j.is_null()) return StateSpec::vacuum();
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  const std::string kind = j.value("kind", "");
  if (kind == "vacuum") return StateSpec::vacuum();
  if (kind == "coherent") {
    return StateSpec::coherent(as_complex(require_field(j, "amplitude", field), field + ".amplitude"));
  }
  if (kind == "fock") {
    const json& n = require_field(j, "n", field);
    if (!n.is_number_integer() || n.get<int>() < 0) {
      throw ConfigError(field + ".n", "expected a nonnegative integer");
    }
    return StateSpec::fock(n.get<int>());
  }
  if (kind == "density-file") {
    const json& p = require_field(j, "path", field);
    if (!p.is_string()) throw ConfigError(field + ".path", "expected a string");
    return StateSpec::from_density(load_density_file(p.get<std::string>(), field + ".path"));
  }
  throw ConfigError(field + ".kind", "expected vacuum | coherent | fock | density-file");
}

SchemeConfig parse_scheme_config(const json& j, const std::string& prefix, const Options& opt) {
  if (!j.is_object()) throw ConfigError(prefix.empty() ? "config" : prefix, "expected an object");
  auto path = [&](const std::string& key) { return prefix.empty() ? key : prefix + "." + key; };

  SchemeConfig cfg;
  cfg.scheme = parse_scheme_name(require_field(j, "scheme", prefix), path("scheme"));
  if (j.contains("backend")) cfg.backend = parse_backend_name(j.at("backend"), path("backend"));
  if (j.contains("signal")) cfg.signal = parse_state_spec(j.at("signal"), path("signal"));
  if (j.contains("idler")) cfg.idler = parse_state_spec(j.at("idler"), path("idler"));
  if (j.contains("lo_magnitude")) cfg.lo_magnitude = as_number(j.at("lo_magnitude"), path("lo_magnitude"));
  if (j.contains("lo_phase")) cfg.lo_phase = as_number(j.at("lo_phase"), path("lo_phase"));
  if (j.contains("eta")) cfg.eta = as_number(j.at("eta"), path("eta"));
  if (j.contains("heterodyne_mixing")) {
    cfg.heterodyne_mixing = as_number(j.at("heterodyne_mixing"), path("heterodyne_mixing"));
  }
  if (j.contains("cutoff")) {
    if (!j.at("cutoff").is_number_integer()) throw ConfigError(path("cutoff"), "expected an integer");
    cfg.cutoff = j.at("cutoff").get<int>();
  }
  if (j.contains("samples")) {
    if (!j.at("samples").is_number_unsigned() && !j.at("samples").is_number_integer()) {
      throw ConfigError(path("samples"), "expected a positive integer");
    }
    const std::int64_t n = j.at("samples").get<std::int64_t>();
    if (n <= 0) throw ConfigError(path("samples"), "expected a positive integer");
    cfg.sample_count = static_cast<std::size_t>(n);
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (opt.seed_override) cfg.seed = *opt.seed_override;
  cfg.threads = opt.threads;

  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(prefix.empty() ? "config" : prefix, e.what());
  }
  return cfg;
}

int state_cutoff(const StateSpec& spec) {
  switch (spec.kind) {
    case StateSpec::Kind::Coherent: return std::max(10, coherent_cutoff(spec.amplitude));
    case StateSpec::Kind::Fock: return spec.photon_number + 8;
    case StateSpec::Kind::Density: return spec.density->dim();
  }
  return 10;
}

GridGeometry parse_grid(const json& j, const std::string& field, Complex centroid) {
  GridGeometry g = default_grid(centroid);
  if (j.is_null()) return g;
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  if (j.contains("points")) {
    if (!j.at("points").is_number_integer()) throw ConfigError(field + ".points", "expected an integer");
    g.points = j.at("points").get<int>();
  }
  if (j.contains("half_extent")) {
    const double L = as_number(j.at("half_extent"), field + ".half_extent");
    if (L > 0.0) g.half_extent = L;  // zero keeps the automatic extent
  }
  const int p = g.points;
  if (p < 8 || (p & (p - 1)) != 0) {
    throw ConfigError(field + ".points", "expected a power of two >= 8");
  }
  return g;
}

void write_samples_csv(const std::filesystem::path& path,
                       const std::vector<PhotocurrentSample>& samples) {
  std::ostringstream out;
  const std::size_t detectors = samples.empty() ? 0 : samples.front().counts.size();
  for (std::size_t k = 0; k < detectors; ++k) out << "i" << (k + 1) << ",";
  out << "z1,z2\n";
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < detectors; ++k) out << s.counts[k] << ",";
    out << format_double(s.z1) << "," << format_double(s.z2) << "\n";
  }
  write_text(path, out.str());
}

void write_grid_csv(const std::filesystem::path& path, const PhaseSpaceGrid& grid, double eta) {
  std::ostringstream out;
  out << "# kind=propensity normalization=unit-integral-d2alpha"
      << " eta=" << format_double(eta)
      << " half_extent=" << format_double(grid.geom.half_extent)
      << " points=" << grid.geom.points << "\n";
  out << "alpha_re,alpha_im,K\n";
  for (int i = 0; i < grid.geom.points; ++i) {
    for (int j = 0; j < grid.geom.points; ++j) {
      out << format_double(grid.geom.axis(i)) << "," << format_double(grid.geom.axis(j)) << ","
          << format_double(grid.values(i, j).real()) << "\n";
    }
  }
  write_text(path, out.str());
}

PhaseSpaceGrid read_grid_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  GridGeometry geom;
  bool have_meta = false;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string token;
      while (meta >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "half_extent") geom.half_extent = std::stod(value);
        if (key == "points") geom.points = std::stoi(value);
      }
      have_meta = true;
      continue;
    }
    if (line.rfind("alpha_re", 0) == 0) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::runtime_error("malformed grid CSV row: " + line);
    }
    values.push_back(std::stod(line.substr(c2 + 1)));
  }
  if (!have_meta) throw std::runtime_error("grid CSV is missing its metadata header");
  if (static_cast<int>(values.size()) != geom.points * geom.points) {
    throw std::runtime_error("grid CSV row count does not match points^2");
  }
  PhaseSpaceGrid grid{geom, GridKind::Propensity,
                      Eigen::MatrixXcd::Zero(geom.points, geom.points)};
  std::size_t idx = 0;
  for (int i = 0; i < geom.points; ++i) {
    for (int j = 0; j < geom.points; ++j) grid.values(i, j) = values[idx++];
  }
  return grid;
}

int run_simulate(const json& config, const Options& opt) {
  const SchemeConfig cfg = parse_scheme_config(config, "", opt);
  const auto samples = run_scheme(cfg);
  std::filesystem::create_directories(opt.out_dir);
  write_samples_csv(opt.out_dir / "samples.csv", samples);

  const stats::MeanCov m = stats::mean_covariance(to_points(samples));
  json summary = {
      {"scheme", to_string(cfg.scheme)},
      {"backend", to_string(cfg.backend)},
      {"signal", state_to_json(cfg.signal)},
      {"idler", state_to_json(cfg.idler)},
      {"eta", cfg.eta},
      {"lo_magnitude", cfg.lo_magnitude},
      {"lo_phase", cfg.lo_phase},
      {"seed", cfg.seed},
      {"samples", samples.size()},
      {"detectors", samples.empty() ? 0 : samples.front().counts.size()},
      {"moments", moments_to_json(m)},
  };
  if (cfg.scheme == Scheme::Heterodyne) summary["heterodyne_mixing"] = cfg.heterodyne_mixing;
  write_json(opt.out_dir / "summary.json", summary);
  std::cout << "wrote " << samples.size() << " samples; mean = (" << format_double(m.mean(0))
            << ", " << format_double(m.mean(1)) << ")\n";
  return 0;
}

int run_propensity(const json& config, const Options& opt) {
  if (!config.is_object()) throw ConfigError("config", "expected an object");
  const StateSpec signal = parse_state_spec(config.value("signal", json()), "signal");
  const StateSpec probe = parse_state_spec(config.value("probe", json()), "probe");
  const double eta = config.contains("eta") ? as_number(config.at("eta"), "eta") : 1.0;
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta", "must lie in (0, 1]");

  Complex centroid = 0.0;
  if (signal.is_coherent()) centroid += signal.amplitude;
  if (probe.is_coherent()) centroid += std::conj(probe.amplitude);
  const GridGeometry geom = parse_grid(config.value("grid", json()), "grid", centroid);

  const int cutoff = std::max(state_cutoff(signal), state_cutoff(probe));
  const PhaseSpaceGrid grid = propensity(signal.to_density(cutoff), probe.to_density(cutoff),
                                         geom, Efficiency(eta));
  std::filesystem::create_directories(opt.out_dir);
  if (opt.format == "json") {
    json rows = json::array();
    for (int i = 0; i < geom.points; ++i) {
      json row = json::array();
      for (int j = 0; j < geom.points; ++j) row.push_back(grid.values(i, j).real());
      rows.push_back(row);
    }
    write_json(opt.out_dir / "propensity.json",
               {{"eta", eta},
                {"half_extent", geom.half_extent},
                {"points", geom.points},
                {"normalization", "unit-integral-d2alpha"},
                {"values", rows}});
  } else {
    write_grid_csv(opt.out_dir / "propensity.csv", grid, eta);
  }
  std::cout << "propensity grid " << geom.points << "x" << geom.points
            << ", integral = " << format_double(grid.integral())
            << ", K(0) = " << format_double(grid.value_at_origin()) << "\n";
  return 0;
}

int run_equivalence(const json& config, const Options& opt) {
  if (!config.is_object()) throw ConfigError("config", "expected an object");
  const SchemeConfig first = parse_scheme_config(require_field(config, "first", ""), "first", opt);
  const SchemeConfig second =
      parse_scheme_config(require_field(config, "second", ""), "second", opt);
  const double significance =
      config.contains("significance") ? as_number(config.at("significance"), "significance") : 0.01;
  if (first.eta != second.eta) {
    throw ConfigError("second.eta", "must match first.eta for an equivalence run");
  }
  if (!first.signal.same_physics(second.signal) || !first.idler.same_physics(second.idler)) {
    throw ConfigError("second", "signal/idler must match first's");
  }

  const EquivalenceReport r = equivalence_report(first, second, significance);
  json out = {
      {"first", {{"scheme", to_string(first.scheme)}, {"moments", moments_to_json(r.moments_a)}}},
      {"second", {{"scheme", to_string(second.scheme)}, {"moments", moments_to_json(r.moments_b)}}},
      {"operator_delta", r.operator_delta},
      {"ks",
       {{"z1", {{"statistic", r.ks_z1.statistic}, {"p_value", r.ks_z1.p_value}}},
        {"z2", {{"statistic", r.ks_z2.statistic}, {"p_value", r.ks_z2.p_value}}}}},
      {"mean_delta", {r.mean_delta(0), r.mean_delta(1)}},
      {"significance", significance},
      {"verdict", r.equivalent ? "equivalent" : "different"},
  };
  std::filesystem::create_directories(opt.out_dir);
  write_json(opt.out_dir / "equivalence.json", out);
  std::cout << "verdict: " << (r.equivalent ? "equivalent" : "different")
            << " (operator delta " << format_double(r.operator_delta) << ", KS p "
            << format_double(r.ks_z1.p_value) << " / " << format_double(r.ks_z2.p_value) << ")\n";
  if (!r.equivalent) throw VerdictFailure("equivalence verdict: different");
  return 0;
}

int run_loss_check(const json& config, const Options& opt) {
  if (!config.is_object()) throw ConfigError("config", "expected an object");
  const StateSpec state = parse_state_spec(config.value("state", json()), "state");
  int cutoff = config.value("cutoff", 0);
  if (cutoff == 0) cutoff = state_cutoff(state);
  if (cutoff < 2) throw ConfigError("cutoff", "must be >= 2");
  std::vector<double> etas;
  if (config.contains("etas")) {
    for (const auto& e : config.at("etas")) etas.push_back(e.get<double>());
  } else {
    etas = {0.3, 0.6, 0.9};
  }

  const DensityOperator rho = state.to_density(cutoff);
  json results = json::array();
  double worst = 0.0;
  for (double eta : etas) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("etas", "each eta must lie in (0, 1]");
    const auto rep = loss_equivalence_check(rho, Efficiency(eta));
    worst = std::max(worst, rep.max_abs_difference);
    results.push_back({{"eta", eta}, {"max_abs_difference", rep.max_abs_difference}});
  }
  const bool pass = worst <= 1e-10;
  std::filesystem::create_directories(opt.out_dir);
  write_json(opt.out_dir / "loss_check.json",
             {{"state", state_to_json(state)},
              {"cutoff", cutoff},
              {"results", results},
              {"max_abs_difference", worst},
              {"pass", pass}});
  std::cout << "loss-model gap: " << format_double(worst) << (pass ? " (pass)" : " (FAIL)") << "\n";
  if (!pass) throw VerdictFailure("loss-model equivalence gap above 1e-10");
  return 0;
}

int run_decompose(const Options& opt) {
  const TripleCouplerDecomposition dec = triple_coupler_decomposition();
  std::filesystem::create_directories(opt.out_dir);
  if (opt.format == "json") {
    json elements = json::array();
    for (const auto& e : dec.sequence.elements) {
      if (e.kind == Element::Kind::BeamSplitter) {
        elements.push_back({{"type", "beamsplitter"},
                            {"modes", {e.mode_a, e.mode_b}},
                            {"transmissivity", e.value}});
      } else {
        elements.push_back({{"type", "phaseshifter"}, {"mode", e.mode_a}, {"angle", e.value}});
      }
    }
    json phases_in = json::array(), phases_out = json::array();
    for (int i = 0; i < 3; ++i) {
      phases_in.push_back(std::arg(dec.input_phases(i)));
      phases_out.push_back(std::arg(dec.output_phases(i)));
    }
    write_json(opt.out_dir / "decomposition.json",
               {{"elements", elements},
                {"input_phases", phases_in},
                {"output_phases", phases_out},
                {"residual", dec.residual}});
  } else {
    std::ostringstream out;
    out << "step,type,mode_a,mode_b,value\n";
    int step = 0;
    for (const auto& e : dec.sequence.elements) {
      const bool bs = e.kind == Element::Kind::BeamSplitter;
      out << step++ << "," << (bs ? "beamsplitter" : "phaseshifter") << "," << e.mode_a << ","
          << (bs ? std::to_string(e.mode_b) : std::string("")) << "," << format_double(e.value)
          << "\n";
    }
    write_text(opt.out_dir / "decomposition.csv", out.str());
  }
  std::cout << "triple-coupler decomposition residual: " << format_double(dec.residual) << "\n";
  return 0;
}

}  // namespace twophoto::experiment
