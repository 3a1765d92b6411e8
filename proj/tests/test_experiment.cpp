#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "twophoto/experiment.hpp"

using namespace twophoto;
using namespace twophoto::experiment;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("twophoto_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json eightport_vacuum_config(int n) {
  return {{"scheme", "eightport"},
          {"signal", {{"kind", "vacuum"}}},
          {"idler", {{"kind", "vacuum"}}},
          {"lo_magnitude", 1e4},
          {"eta", 1.0},
          {"samples", n},
          {"seed", 7}};
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 123456.789, 1e-300, -0.0, 2.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("simulate writes the documented CSV shape") {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path;
  opt.threads = 1;
  CHECK(run_simulate(eightport_vacuum_config(1000), opt) == 0);

  const std::string csv = slurp(dir.path / "samples.csv");
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "i1,i2,i3,i4,z1,z2");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == 1000);
  CHECK(csv.find("\r") == std::string::npos);

  const json summary = json::parse(slurp(dir.path / "summary.json"));
  CHECK(summary.at("scheme") == "eightport");
  CHECK(summary.at("samples") == 1000);
  // Vacuum covariance diagonal is near (0.5, 0.5) at unit efficiency.
  const double c00 = summary.at("moments").at("covariance")[0][0].get<double>();
  const double c11 = summary.at("moments").at("covariance")[1][1].get<double>();
  CHECK(c00 == doctest::Approx(0.5).epsilon(0.15));
  CHECK(c11 == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("simulate is byte-identical for a fixed config and seed") {
  TempDir a, b;
  Options opt_a, opt_b;
  opt_a.out_dir = a.path;
  opt_b.out_dir = b.path;
  opt_a.threads = 1;
  opt_b.threads = 4;  // thread count must not leak into the output
  const json cfg = eightport_vacuum_config(2000);
  run_simulate(cfg, opt_a);
  run_simulate(cfg, opt_b);
  CHECK(slurp(a.path / "samples.csv") == slurp(b.path / "samples.csv"));
  CHECK(slurp(a.path / "summary.json") == slurp(b.path / "summary.json"));
}

TEST_CASE("propensity grid file round-trips") {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path;
  const json cfg = {{"signal", {{"kind", "vacuum"}}},
                    {"probe", {{"kind", "vacuum"}}},
                    {"eta", 1.0},
                    {"grid", {{"half_extent", 6.0}, {"points", 64}}}};
  CHECK(run_propensity(cfg, opt) == 0);

  const PhaseSpaceGrid grid = read_grid_csv(dir.path / "propensity.csv");
  CHECK(grid.geom.points == 64);
  CHECK(grid.geom.half_extent == doctest::Approx(6.0));
  CHECK(grid.value_at_origin() == doctest::Approx(1.0 / M_PI).epsilon(0.01));
  CHECK(grid.integral() == doctest::Approx(1.0).epsilon(0.005));

  // Writing the parsed grid again reproduces the file byte for byte.
  write_grid_csv(dir.path / "again.csv", grid, 1.0);
  CHECK(slurp(dir.path / "propensity.csv") == slurp(dir.path / "again.csv"));
}

TEST_CASE("propensity is continuous in the efficiency") {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path;
  json cfg = {{"signal", {{"kind", "vacuum"}}},
              {"probe", {{"kind", "vacuum"}}},
              {"eta", 1.0},
              {"grid", {{"half_extent", 6.0}, {"points", 64}}}};
  run_propensity(cfg, opt);
  const PhaseSpaceGrid full = read_grid_csv(dir.path / "propensity.csv");
  cfg["eta"] = 0.999;
  run_propensity(cfg, opt);
  const PhaseSpaceGrid near = read_grid_csv(dir.path / "propensity.csv");
  CHECK((full.values - near.values).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("equivalence command validates and reports") {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path;
  opt.threads = 2;
  json first = {{"scheme", "eightport"},
                {"signal", {{"kind", "coherent"}, {"amplitude", {1.0, 0.5}}}},
                {"lo_magnitude", 1e4},
                {"eta", 0.8},
                {"samples", 20000},
                {"seed", 11}};
  json second = first;
  second["scheme"] = "sixport";

  SUBCASE("matched configs come out equivalent") {
    const json cfg = {{"first", first}, {"second", second}};
    CHECK(run_equivalence(cfg, opt) == 0);
    const json report = json::parse(slurp(dir.path / "equivalence.json"));
    CHECK(report.at("verdict") == "equivalent");
    CHECK(report.at("operator_delta").get<double>() <= 1e-12);
  }
  SUBCASE("heterodyne against the four-port scheme") {
    second["scheme"] = "heterodyne";
    second["heterodyne_mixing"] = 100.0;
    const json cfg = {{"first", first}, {"second", second}};
    CHECK(run_equivalence(cfg, opt) == 0);
    const json report = json::parse(slurp(dir.path / "equivalence.json"));
    CHECK(report.at("verdict") == "equivalent");
  }
  SUBCASE("mismatched efficiency is rejected up front") {
    second["eta"] = 0.5;
    const json cfg = {{"first", first}, {"second", second}};
    CHECK_THROWS_AS(run_equivalence(cfg, opt), ConfigError);
  }
}

TEST_CASE("loss-check command") {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path;
  const json cfg = {{"state", {{"kind", "coherent"}, {"amplitude", {1.0, 0.0}}}},
                    {"cutoff", 12},
                    {"etas", {0.3, 0.6, 0.9}}};
  CHECK(run_loss_check(cfg, opt) == 0);
  const json report = json::parse(slurp(dir.path / "loss_check.json"));
  CHECK(report.at("pass") == true);
  CHECK(report.at("max_abs_difference").get<double>() <= 1e-10);
}

TEST_CASE("decompose command emits the element list") {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path;
  opt.format = "json";
  CHECK(run_decompose(opt) == 0);
  const json report = json::parse(slurp(dir.path / "decomposition.json"));
  CHECK(report.at("elements").size() == 6);
  int splitters = 0;
  for (const auto& e : report.at("elements")) {
    if (e.at("type") == "beamsplitter") ++splitters;
  }
  CHECK(splitters == 4);
  CHECK(report.at("residual").get<double>() <= 1e-10);

  opt.format = "csv";
  CHECK(run_decompose(opt) == 0);
  const std::string csv = slurp(dir.path / "decomposition.csv");
  CHECK(csv.rfind("step,type,mode_a,mode_b,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header + six elements
}

TEST_CASE("config errors carry a field path") {
  Options opt;
  SUBCASE("unknown scheme") {
    try {
      run_simulate({{"scheme", "tenport"}}, opt);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "scheme");
    }
  }
  SUBCASE("bad amplitude shape") {
    try {
      parse_state_spec({{"kind", "coherent"}, {"amplitude", 3.0}}, "signal");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "signal.amplitude");
    }
  }
  SUBCASE("efficiency out of range") {
    json cfg = eightport_vacuum_config(10);
    cfg["eta"] = 1.5;
    CHECK_THROWS_AS(run_simulate(cfg, opt), ConfigError);
  }
  SUBCASE("grid points must be a power of two") {
    const json cfg = {{"signal", {{"kind", "vacuum"}}},
                      {"probe", {{"kind", "vacuum"}}},
                      {"grid", {{"points", 100}}}};
    CHECK_THROWS_AS(run_propensity(cfg, opt), ConfigError);
  }
}

TEST_CASE("density files load as states") {
  TempDir dir;
  const fs::path file = dir.path / "rho.json";
  {
    std::ofstream out(file);
    out << R"({"populations": [0.5, 0.3, 0.2]})";
  }
  const StateSpec spec =
      parse_state_spec({{"kind", "density-file"}, {"path", file.string()}}, "signal");
  CHECK(spec.kind == StateSpec::Kind::Density);
  CHECK(spec.density->trace_real() == doctest::Approx(1.0));
  CHECK(spec.mean_photons() == doctest::Approx(0.7));
}
