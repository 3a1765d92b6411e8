#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "twophoto/phasespace.hpp"
#include "twophoto/schemes.hpp"

namespace twophoto::experiment {

/// Invalid or inconsistent configuration; carries the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, std::string message)
      : std::runtime_error(field + ": " + message),
        field_(std::move(field)),
        message_(std::move(message)) {}
  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }

 private:
  std::string field_;
  std::string message_;
};

/// An equivalence-style verdict came out negative (CI exit code 3).
class VerdictFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  int threads = 0;  // 0 = hardware concurrency
  std::string format = "csv";
};

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

StateSpec parse_state_spec(const nlohmann::json& j, const std::string& field);
SchemeConfig parse_scheme_config(const nlohmann::json& j, const std::string& prefix,
                                 const Options& opt);
GridGeometry parse_grid(const nlohmann::json& j, const std::string& field, Complex centroid);

/// Working cutoff for representing a state spec as a density operator.
int state_cutoff(const StateSpec& spec);

void write_samples_csv(const std::filesystem::path& path,
                       const std::vector<PhotocurrentSample>& samples);
void write_grid_csv(const std::filesystem::path& path, const PhaseSpaceGrid& grid, double eta);
PhaseSpaceGrid read_grid_csv(const std::filesystem::path& path);

/// Subcommand bodies; each writes its artifacts under opt.out_dir and
/// returns the process exit code (0 on success).
int run_simulate(const nlohmann::json& config, const Options& opt);
int run_propensity(const nlohmann::json& config, const Options& opt);
int run_equivalence(const nlohmann::json& config, const Options& opt);
int run_loss_check(const nlohmann::json& config, const Options& opt);
int run_decompose(const Options& opt);

}  // namespace twophoto::experiment
