#include "eqed/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace eqed {

using nlohmann::json;

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
  const char* description;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::Fig1Spectrum, "fig1_spectrum",
     "cube ensemble transmission spectra versus N, both routes, plus the delta_g(N) scaling"},
    {ExperimentKind::Fig1G2, "fig1_g2", "cube ensemble g2(0) sweeps versus N from driven steady states"},
    {ExperimentKind::Fig2Map, "fig2_map", "point-dipole |g_A_eff / gamma_+| maps over (r, theta) for both panels"},
    {ExperimentKind::Fig2Dynamics, "fig2_dynamics",
     "one-photon dynamics at the marked points: full model, effective model, bare cavity"},
    {ExperimentKind::Fig3SiV, "fig3_siv", "SiV- nanodiamond: g_A_eff and gamma_+ versus N, spectrum and g2 at N=1000"},
    {ExperimentKind::SmDisorder, "sm_disorder", "spectral and positional disorder campaigns on the N=12^3 cube"},
    {ExperimentKind::Custom, "custom", "cube or point-dipole ensemble with user parameters: spectrum and g2"},
};

// Cube constants: g0_A = 1, gamma_A = 0.01, kappa = 2, omega_B - omega_A = 1000,
// r_A = 0, cube centre (0, 0, lambda/20), d = 1e-3 lambda; B identical to A
// apart from its frequency.
json fig1_physics() {
  return {{"g0_A", 1.0},     {"g0_B", 1.0},    {"gamma_A", 0.01},
          {"gamma_B", 0.01}, {"kappa", 2.0},   {"delta_B", 1000.0},
          {"delta_c", 0.0},  {"target", {0.0, 0.0, 0.0}}};
}

json fig1_ensemble() {
  return {{"shape", "cube"}, {"n_side", 12}, {"spacing", 1e-3}, {"center", {0.0, 0.0, 0.05}}};
}

json default_sweep() {
  return {{"points", 401}, {"span_factor", 3.0}, {"min", nullptr}, {"max", nullptr}, {"resolvent", "modal"}};
}

json default_drive() {
  return {{"phi_over_kappa", 0.1},
          {"cross_check_phi_over_kappa", 0.01},
          {"n_photon_max", 3},
          {"check_cutoff", true},
          {"dimension_limit", 4096}};
}

// Single-dipole panels. a: cube constants but g0_B = 100, gamma_B = 100, x-z plane.
// c: gamma_A = 2.5, kappa = 0.1, omega_B = omega_A, g0_B = 20,
// gamma_B = 1000, r_A = (0, -1/4, 0), y-z plane.
json fig2_panels() {
  return json::array(
      {{{"name", "a"},
        {"g0_A", 1.0},
        {"g0_B", 100.0},
        {"gamma_A", 0.01},
        {"gamma_B", 100.0},
        {"kappa", 2.0},
        {"delta_B", 1000.0},
        {"delta_c", 0.0},
        {"target", {0.0, 0.0, 0.0}},
        {"plane", "xz"},
        {"marked_point", {{"r", 0.05}, {"theta_over_pi", 0.0}}}},
       {{"name", "c"},
        {"g0_A", 1.0},
        {"g0_B", 20.0},
        {"gamma_A", 2.5},
        {"gamma_B", 1000.0},
        {"kappa", 0.1},
        {"delta_B", 0.0},
        {"delta_c", 0.0},
        {"target", {0.0, -0.25, 0.0}},
        {"plane", "yz"},
        {"marked_point", {{"r", 0.09}, {"theta_over_pi", 0.3235}}}}});
}

json base(ExperimentKind kind) {
  std::string name;
  for (const auto& k : kKinds)
    if (k.kind == kind) name = k.name;
  return {{"schema_version", kConfigSchemaVersion}, {"experiment", name}, {"seed", 0}, {"output", "out/" + name}};
}

// ---- schema checking against the preset used as a type template ----

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const char* type_name(const json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "bool";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  return "object";
}

void check_against(const json& value, const json& tmpl, const std::string& path) {
  if (tmpl.is_object()) {
    if (!value.is_object()) fail(path.empty() ? "<root>" : path, std::string("expected object, got ") + type_name(value));
    for (auto it = value.begin(); it != value.end(); ++it)
      if (!tmpl.contains(it.key())) fail(join(path, it.key()), "unknown field");
    for (auto it = tmpl.begin(); it != tmpl.end(); ++it) {
      if (!value.contains(it.key())) fail(join(path, it.key()), "missing field");
      check_against(value.at(it.key()), it.value(), join(path, it.key()));
    }
    return;
  }
  if (tmpl.is_array()) {
    if (!value.is_array()) fail(path, std::string("expected array, got ") + type_name(value));
    if (tmpl.empty()) return;
    for (std::size_t i = 0; i < value.size(); ++i) check_against(value[i], tmpl[0], path + "." + std::to_string(i));
    return;
  }
  if (tmpl.is_null()) {
    if (!value.is_null() && !value.is_number()) fail(path, std::string("expected number or null, got ") + type_name(value));
    return;
  }
  if (tmpl.is_boolean()) {
    if (!value.is_boolean()) fail(path, std::string("expected bool, got ") + type_name(value));
    return;
  }
  if (tmpl.is_number_integer()) {
    if (!value.is_number_integer()) fail(path, std::string("expected integer, got ") + type_name(value));
    return;
  }
  if (tmpl.is_number()) {
    if (!value.is_number()) fail(path, std::string("expected number, got ") + type_name(value));
    if (!std::isfinite(value.get<double>())) fail(path, "must be finite");
    return;
  }
  if (tmpl.is_string() && !value.is_string()) fail(path, std::string("expected string, got ") + type_name(value));
}

void merge_into(json& target, const json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (it.value().is_object() && target.contains(it.key()) && target[it.key()].is_object())
      merge_into(target[it.key()], it.value());
    else
      target[it.key()] = it.value();
  }
}

// ---- value ranges ----

double num(const json& j, const char* key) { return j.at(key).get<double>(); }

void positive(const json& j, const std::string& path, const char* key) {
  if (!(num(j, key) > 0.0)) fail(join(path, key), "must be > 0");
}

void nonnegative(const json& j, const std::string& path, const char* key) {
  if (!(num(j, key) >= 0.0)) fail(join(path, key), "must be >= 0");
}

void at_least(const json& j, const std::string& path, const char* key, long lo) {
  if (j.at(key).get<long>() < lo) fail(join(path, key), "must be >= " + std::to_string(lo));
}

void check_vec3(const json& j, const std::string& path) {
  if (j.size() != 3) fail(path, "expected 3 components");
  for (const auto& c : j)
    if (!c.is_number() || !std::isfinite(c.get<double>())) fail(path, "components must be finite numbers");
}

void check_rates(const json& p, const std::string& path) {
  for (const char* k : {"g0_A", "g0_B"}) positive(p, path, k);
  for (const char* k : {"gamma_A", "gamma_B", "kappa"}) nonnegative(p, path, k);
  check_vec3(p.at("target"), join(path, "target"));
}

void check_ranges(const json& t, ExperimentKind kind) {
  if (t.at("schema_version").get<int>() != kConfigSchemaVersion)
    fail("schema_version", "unsupported version (expected " + std::to_string(kConfigSchemaVersion) + ")");
  if (t.contains("physics")) {
    check_rates(t["physics"], "physics");
    if (kind == ExperimentKind::Fig1Spectrum || kind == ExperimentKind::Fig1G2 || kind == ExperimentKind::Custom)
      positive(t["physics"], "physics", "kappa");
  }
  if (t.contains("ensemble")) {
    const auto& e = t["ensemble"];
    at_least(e, "ensemble", "n_side", 1);
    nonnegative(e, "ensemble", "spacing");
    check_vec3(e.at("center"), "ensemble.center");
    const auto shape = e.at("shape").get<std::string>();
    if (shape != "cube" && shape != "point") fail("ensemble.shape", "must be \"cube\" or \"point\"");
  }
  if (t.contains("scan")) {
    for (auto it = t["scan"].begin(); it != t["scan"].end(); ++it) {
      if (it.value().empty()) fail("scan." + it.key(), "must not be empty");
      for (const auto& n : it.value())
        if (n.get<long>() < 1) fail("scan." + it.key(), "entries must be >= 1");
    }
  }
  if (t.contains("sweep")) {
    const auto& s = t["sweep"];
    at_least(s, "sweep", "points", 3);
    positive(s, "sweep", "span_factor");
    if (s["min"].is_null() != s["max"].is_null()) fail("sweep.min", "min and max must be given together");
    if (!s["min"].is_null() && !(s["max"].get<double>() > s["min"].get<double>()))
      fail("sweep.max", "must exceed sweep.min");
    const auto r = s.at("resolvent").get<std::string>();
    if (r != "modal" && r != "hessenberg" && r != "direct") fail("sweep.resolvent", "must be modal, hessenberg or direct");
  }
  if (t.contains("drive")) {
    const auto& d = t["drive"];
    positive(d, "drive", "phi_over_kappa");
    positive(d, "drive", "cross_check_phi_over_kappa");
    at_least(d, "drive", "n_photon_max", 1);
    at_least(d, "drive", "dimension_limit", 4);
  }
  if (t.contains("panels")) {
    if (t["panels"].empty()) fail("panels", "must not be empty");
    for (std::size_t i = 0; i < t["panels"].size(); ++i) {
      const auto& p = t["panels"][i];
      const std::string path = "panels." + std::to_string(i);
      check_rates(p, path);
      positive(p, path, "kappa");
      const auto plane = p.at("plane").get<std::string>();
      if (plane != "xz" && plane != "yz") fail(path + ".plane", "must be \"xz\" or \"yz\"");
      positive(p.at("marked_point"), path + ".marked_point", "r");
    }
  }
  if (t.contains("map")) {
    const auto& m = t["map"];
    positive(m, "map", "r_min");
    if (!(num(m, "r_max") >= num(m, "r_min"))) fail("map.r_max", "must be >= map.r_min");
    at_least(m, "map", "r_points", 1);
    at_least(m, "map", "theta_points", 1);
    if (!(num(m, "theta_max_over_pi") >= num(m, "theta_min_over_pi")))
      fail("map.theta_max_over_pi", "must be >= map.theta_min_over_pi");
  }
  if (t.contains("dynamics")) {
    const auto& d = t["dynamics"];
    positive(d, "dynamics", "rabi_periods");
    at_least(d, "dynamics", "samples", 2);
    at_least(d, "dynamics", "n_photon_max", 1);
    at_least(d, "dynamics", "dimension_limit", 4);
  }
  if (t.contains("disorder")) {
    const auto& d = t["disorder"];
    at_least(d, "disorder", "realizations", 1);
    at_least(d, "disorder", "positional_realizations", 1);
    at_least(d, "disorder", "histogram_bins", 0);
    for (const char* k : {"spectral_strengths_over_delta_B", "positional_strengths_over_spacing"})
      for (const auto& w : d.at(k))
        if (!(w.get<double>() >= 0.0)) fail(std::string("disorder.") + k, "strengths must be >= 0");
  }
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  throw ConfigError("experiment: unknown experiment kind '" + name + "'");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& k : kKinds) out.emplace_back(k.name);
  return out;
}

std::string preset_description(ExperimentKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.description;
  return {};
}

json preset(ExperimentKind kind) {
  json j = base(kind);
  switch (kind) {
    case ExperimentKind::Fig1Spectrum:
      j["physics"] = fig1_physics();
      j["ensemble"] = fig1_ensemble();
      j["scan"] = {{"n_sides", {4, 8, 12}},
                   {"scaling_n_sides", {2, 3, 4, 5, 6, 8, 10, 12}},
                   {"scaling_fit_n_sides", {2, 3, 4, 5, 6}}};
      j["sweep"] = default_sweep();
      j["drive"] = default_drive();
      break;
    case ExperimentKind::Fig1G2:
      j["physics"] = fig1_physics();
      j["ensemble"] = fig1_ensemble();
      j["scan"] = {{"n_sides", {4, 8, 12}}};
      j["sweep"] = default_sweep();
      j["drive"] = default_drive();
      break;
    case ExperimentKind::Fig2Map:
      j["panels"] = fig2_panels();
      j["map"] = {{"r_min", 0.01},          {"r_max", 0.2},
                  {"r_points", 100},        {"theta_min_over_pi", 0.0},
                  {"theta_max_over_pi", 0.5}, {"theta_points", 100}};
      break;
    case ExperimentKind::Fig2Dynamics:
      j["panels"] = fig2_panels();
      j["dynamics"] = {{"rabi_periods", 3.0},
                       {"samples", 301},
                       {"compensate_detuning", true},
                       {"n_photon_max", 3},
                       {"dimension_limit", 4096}};
      break;
    case ExperimentKind::Fig3SiV: {
      // SiV constants: g0_A = 1, omega_A = omega_c, gamma_A = gamma_B = 0.044,
      // kappa = 2, Delta_B = 265, r_A = 0; cube of spacing 8 nm centred 60 nm
      // above A, lambda = 737 nm.
      j["physics"] = {{"g0_A", 1.0},      {"g0_B", 1.0},    {"gamma_A", 0.044},
                      {"gamma_B", 0.044}, {"kappa", 2.0},   {"delta_B", 265.0},
                      {"delta_c", 0.0},   {"target", {0.0, 0.0, 0.0}}};
      j["ensemble"] = {{"shape", "cube"}, {"n_side", 10}, {"spacing", 8.0 / 737.0}, {"center", {0.0, 0.0, 60.0 / 737.0}}};
      j["scan"] = {{"n_sides", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}}};
      j["sweep"] = default_sweep();
      j["drive"] = default_drive();
      break;
    }
    case ExperimentKind::SmDisorder:
      j["physics"] = fig1_physics();
      j["ensemble"] = fig1_ensemble();
      j["sweep"] = default_sweep();
      j["sweep"]["points"] = 121;
      j["sweep"]["resolvent"] = "hessenberg";
      j["disorder"] = {{"spectral_strengths_over_delta_B", {0.0, 0.5, 1.0, 10.0}},
                       {"positional_strengths_over_spacing", {0.01, 0.02, 0.1}},
                       {"realizations", 100},
                       {"positional_realizations", 1000},
                       {"histogram_bins", 0},
                       {"per_realization_spectra", false},
                       {"mode_report", false},
                       {"grade", true}};
      break;
    case ExperimentKind::Custom:
      j["physics"] = fig1_physics();
      j["ensemble"] = fig1_ensemble();
      j["ensemble"]["n_side"] = 4;
      j["sweep"] = default_sweep();
      j["drive"] = default_drive();
      break;
  }
  return j;
}

const json& ExperimentConfig::at(const std::string& dotted) const {
  const json* node = &tree;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (node->is_array()) {
      node = &node->at(std::stoul(part));
    } else {
      if (!node->contains(part)) throw ConfigError(dotted + ": no such field");
      node = &(*node)[part];
    }
  }
  return *node;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": JSON parse error: " + e.what());
  }
}

json merge_with_preset(const json& document_in) {
  const json& document = document_in.contains("resolved_config") ? document_in.at("resolved_config") : document_in;
  if (!document.is_object()) throw ConfigError("<root>: expected a JSON object");
  if (!document.contains("experiment")) throw ConfigError("experiment: missing field");
  if (!document.at("experiment").is_string()) throw ConfigError("experiment: expected string");
  json merged = preset(experiment_kind_from_string(document.at("experiment").get<std::string>()));
  merge_into(merged, document);
  return merged;
}

void apply_override(json& merged, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment + ": override must look like key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  if (path == "experiment") throw ConfigError("experiment: cannot be overridden (pick another config)");
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &merged;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw ConfigError(path + ": '" + part + "' is not an array index");
      }
      if (idx >= node->size()) throw ConfigError(path + ": index out of range");
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (!node->contains(part)) throw ConfigError(path + ": unknown field");
      node = &(*node)[part];
    } else {
      throw ConfigError(path + ": '" + part + "' addresses inside a leaf value");
    }
  }
  // integers written where the template holds a float are fine; the schema
  // check reports real mismatches with the full path
  *node = value;
}

ExperimentConfig validate_config(const json& merged) {
  if (!merged.is_object() || !merged.contains("experiment") || !merged["experiment"].is_string())
    throw ConfigError("experiment: missing or not a string");
  const auto kind = experiment_kind_from_string(merged["experiment"].get<std::string>());
  check_against(merged, preset(kind), "");
  check_ranges(merged, kind);
  return {kind, merged};
}

ExperimentConfig resolve_config(const json& document, const std::vector<std::string>& overrides) {
  json merged = merge_with_preset(document);
  for (const auto& o : overrides) apply_override(merged, o);
  return validate_config(merged);
}

}  // namespace eqed
