#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "twophoto/experiment.hpp"

namespace {

using twophoto::experiment::ConfigError;
using twophoto::experiment::Options;
using twophoto::experiment::VerdictFailure;

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
}

void print_error(const std::string& field, const std::string& message) {
  nlohmann::json err = {{"error", {{"field", field}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-photocurrent detector simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";
  std::uint64_t seed = 0;
  bool have_seed = false;
  int threads = 0;

  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = auto)")->capture_default_str();
  app.add_option("--format", format, "output format for grids/listings")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");

  auto* simulate = app.add_subcommand("simulate", "draw photocurrent samples");
  auto* propensity = app.add_subcommand("propensity", "tabulate the output distribution");
  auto* equivalence = app.add_subcommand("equivalence", "compare two detection schemes");
  auto* loss_check = app.add_subcommand("loss-check", "compare the two detector loss models");
  auto* decompose = app.add_subcommand("decompose", "emit the triple-coupler element list");
  for (auto* cmd : {simulate, propensity, equivalence, loss_check}) {
    cmd->add_option("--config", config_path, "JSON experiment description")->required();
  }
  decompose->add_option("--config", config_path, "unused for decompose");

  CLI11_PARSE(app, argc, argv);
  have_seed = seed_opt->count() > 0;

  Options opt;
  opt.out_dir = out_dir;
  opt.threads = threads;
  opt.format = format;
  if (have_seed) opt.seed_override = seed;

  try {
    if (decompose->parsed()) return twophoto::experiment::run_decompose(opt);
    const nlohmann::json config = load_config(config_path);
    if (simulate->parsed()) return twophoto::experiment::run_simulate(config, opt);
    if (propensity->parsed()) return twophoto::experiment::run_propensity(config, opt);
    if (equivalence->parsed()) return twophoto::experiment::run_equivalence(config, opt);
    if (loss_check->parsed()) return twophoto::experiment::run_loss_check(config, opt);
    return 1;
  } catch (const ConfigError& e) {
    print_error(e.field(), e.message());
    return 1;
  } catch (const VerdictFailure& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    print_error("config", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
