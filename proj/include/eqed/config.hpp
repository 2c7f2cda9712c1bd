#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "eqed/error.hpp"

namespace eqed {

inline constexpr int kConfigSchemaVersion = 1;

/// Schema problems (unknown or mistyped fields, out-of-range values). The
/// message starts with the dotted path of the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Physics pre-flight failures: geometry, Hilbert-space bounds, breakdown
/// of the adiabatic elimination.
class PhysicsValidityError : public Error {
 public:
  using Error::Error;
};

enum class ExperimentKind { Fig1Spectrum, Fig1G2, Fig2Map, Fig2Dynamics, Fig3SiV, SmDisorder, Custom };

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);
std::vector<std::string> preset_names();

/// Fully populated configuration of a preset (every field present).
nlohmann::json preset(ExperimentKind kind);
std::string preset_description(ExperimentKind kind);

/// A validated configuration tree. Rates are in units of g0_A, lengths in
/// units of the cavity wavelength.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Custom;
  nlohmann::json tree;

  std::uint64_t seed() const { return tree.at("seed").get<std::uint64_t>(); }
  std::string output() const { return tree.at("output").get<std::string>(); }
  /// Lookup by dotted path ("physics.kappa").
  const nlohmann::json& at(const std::string& dotted) const;
  double number(const std::string& dotted) const { return at(dotted).get<double>(); }
  int integer(const std::string& dotted) const { return at(dotted).get<int>(); }
};

/// Recursively merges `document` over the preset named by its "experiment"
/// field. A run manifest (with a "resolved_config" member) is accepted in
/// place of a config. Throws ConfigError.
nlohmann::json merge_with_preset(const nlohmann::json& document);

/// Applies "a.b.c=value" to a merged tree. The value is parsed as JSON when
/// possible and taken as a string otherwise. The path must exist (array
/// elements are addressed by index); throws ConfigError naming the path.
void apply_override(nlohmann::json& merged, const std::string& assignment);

/// Schema and value-range checks of a merged tree. Throws ConfigError.
ExperimentConfig validate_config(const nlohmann::json& merged);

/// merge_with_preset, the overrides in order, then validate_config.
ExperimentConfig resolve_config(const nlohmann::json& document, const std::vector<std::string>& overrides = {});

/// Reads and parses a JSON file. Throws ConfigError on I/O or parse errors.
nlohmann::json read_json_file(const std::string& path);

}  // namespace eqed
