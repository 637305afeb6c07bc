#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "varint/diagnostics.hpp"

namespace varint {

/// Invalid or missing configuration value. `field` is the dotted key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& reason)
      : std::runtime_error(field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// File access failure (unreadable config, unwritable output).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed run configuration. One JSON object selecting a model, an
/// integrator with its scheme parameters, and output paths:
///
///   {
///     "model":      {"id": "harmonic_oscillator", ...},
///     "integrator": {"id": "galerkin", "s": 2, "h": 0.1, "steps": 100,
///                    "q0": [1.0], "v0": [0.0]},
///     "output":     {"trajectory": "traj.csv", "summary": "summary.json"},
///     "seed": 0
///   }
///
/// Integrator ids: galerkin | sem | liegroup | dep | multiscale | multisym |
/// tdse | tise. Model ids: free_particle(dim) | harmonic_oscillator(omega) |
/// pendulum | rigid_body(inertia) | stiff_pendulum(m,g,k,l) | wave(speed) |
/// cosine_potential(coefficients).
struct RunConfig {
  nlohmann::json doc;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
};

struct RunResult {
  SeriesTable trajectory;
  DiagnosticsSummary summary;
  nlohmann::json extra;  // integrator-specific additions (eigenvalues, seed)
};

/// Validates and executes the configured run. Throws ConfigError for bad
/// configuration and SolverError when an integrator fails to converge.
RunResult run_config(const RunConfig& config);

/// Runs and writes the trajectory CSV and summary JSON named in the config's
/// output section. Paths that are absent are skipped.
void run_to_files(const RunConfig& config);

/// Machine-readable error document: {"error": {"code", "field", "message"}}.
std::string error_json(int code, const std::string& field, const std::string& message);

}  // namespace varint
