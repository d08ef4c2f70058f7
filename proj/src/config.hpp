#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "covariance_check.hpp"
#include "risk.hpp"

// JSON run configuration.  A run is fully described by one JSON document:
// command, seed, scenario (curve / innovations / sample sizes / step rule /
// estimator / replicates), and execution knobs.  Every run emits a manifest
// whose config-json line holds the normalized document, so feeding a manifest
// back through the loader reproduces the run bit for bit.
//
// Validation is collected: a malformed document reports every problem at
// once (as "<json-path>: <message>" lines), not just the first.

namespace tvar {

enum class Command {
  Simulate,
  Estimate,
  Decompose,
  Covariance,
  Risk,
  Rate,
  ExpansionCheck,
  Compare,
};

const char* command_name(Command command);
Command command_from_name(const std::string& name);  // ValidationError if unknown

struct RunConfig {
  Command command = Command::Simulate;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int workers = 1;
  bool emit_plots = false;
  Scenario scenario;

  // expansion-check extras
  double expansion_beta = 1.0;
  std::optional<Eigen::VectorXd> theta_t_beta;

  // covariance command extras
  SecondMomentMode cov_mode = SecondMomentMode::Exact;

  // Normalized JSON document (compact, sorted keys) this config was built
  // from, including any command-line overrides baked in.
  std::string config_json;
};

// Command-line overrides applied on top of the document before validation.
struct ConfigOverrides {
  std::optional<std::string> command;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> workers;
  std::optional<bool> emit_plots;
};

// Parses a JSON document (with overrides baked in).  Throws ValidationError
// listing every schema violation.
RunConfig parse_run_config(const std::string& json_text,
                           const ConfigOverrides& overrides = {});

// Accepts either a JSON document or a previously written manifest (first
// line "tvar-manifest-version=1"; the config is recovered from its
// config-json line).
RunConfig load_run_config_text(const std::string& text,
                               const ConfigOverrides& overrides = {});

// Builds a curve from its JSON description ("kind": closed_form /
// piecewise_linear / root_trajectory).  Exposed for tests.
std::shared_ptr<const ParamCurve> parse_curve_json(const std::string& json_text);

// Builds a validated scenario from the JSON object that would sit under the
// "scenario" key of a run configuration; the master seed is supplied by the
// caller (it lives at the top level of a run document).
Scenario parse_scenario_json(const std::string& json_text,
                             std::uint64_t master_seed);

inline constexpr const char* kManifestVersionLine = "tvar-manifest-version=1";

}  // namespace tvar
