#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "eqed/config.hpp"
#include "eqed/geometry.hpp"

namespace eqed {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  /// Proceed past adiabaticity failures and invalid effective rates.
  bool force = false;
  /// Refuse to write into a non-empty output directory unless set.
  bool overwrite = true;
};

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::string> files;  // relative to output_dir
  nlohmann::json summary;
  std::vector<std::string> warnings;
};

/// Runs the configured experiment and writes its CSV/JSON outputs plus
/// manifest.json (resolved config, version, wall time, summary).
/// Throws PhysicsValidityError, ConfigError or NumericalFailure.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

struct PreflightCheck {
  std::string name;
  std::string status;  // "pass", "warn" or "fail"
  std::string detail;
};

struct PreflightReport {
  std::vector<PreflightCheck> checks;
  bool ok() const;
  nlohmann::json to_json() const;
};

/// Geometry, Hilbert-space bounds and adiabaticity estimates without running
/// the experiment. With estimates=false only the cheap structural checks run
/// (no matrix assembly); run_experiment uses that mode as its gate.
PreflightReport preflight(const ExperimentConfig& config, bool estimates = true);

/// Cube (or collapsed point-dipole) layout of a cube-type config with the
/// given number of sites per side.
EmitterLayout cube_layout(const ExperimentConfig& config, int n_side);

/// Layout of a point-dipole panel with B at the marked point (or at the
/// given polar coordinates).
EmitterLayout panel_layout(const nlohmann::json& panel, double r, double theta);

}  // namespace eqed
