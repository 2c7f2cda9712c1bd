#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "eqed/config.hpp"
#include "eqed/experiments.hpp"

namespace {

enum Exit { kOk = 0, kReportFailed = 1, kSchema = 2, kPhysics = 3, kNumeric = 4 };

void apply_thread_env() {
  const char* v = std::getenv("EQED_THREADS");
  if (!v || !*v) return;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) {
    std::cerr << "warning: ignoring EQED_THREADS='" << v << "' (expected a positive integer)\n";
    return;
  }
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(n));
#endif
}

// A bare preset name is accepted in place of a file path.
nlohmann::json load_document(const std::string& arg) {
  if (!std::filesystem::exists(arg)) {
    for (const auto& name : eqed::preset_names())
      if (name == arg) return {{"experiment", name}};
  }
  return eqed::read_json_file(arg);
}

int report_error(const std::exception& e, int code) {
  std::cerr << "error: " << e.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity-emitter-ensemble simulations"};
  app.set_version_flag("--version", std::string(eqed::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool force = false;
  bool strict = false;
  std::string dump;

  auto* run = app.add_subcommand("run", "Run an experiment");
  run->add_option("config", config_path, "JSON config, run manifest, or preset name")->required();
  run->add_option("--set", overrides, "Override a leaf by dotted path (key=value)")->take_all();
  auto* seed_opt = run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--force", force, "Proceed despite physics-validity failures");

  auto* validate = app.add_subcommand("validate", "Schema check and physics pre-flight without running");
  validate->add_option("config", config_path, "JSON config, run manifest, or preset name")->required();
  validate->add_option("--set", overrides, "Override a leaf by dotted path (key=value)")->take_all();
  validate->add_flag("--strict", strict, "Exit 1 when any check fails");

  auto* presets = app.add_subcommand("presets", "List presets");
  presets->add_option("--dump", dump, "Print the fully populated preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kSchema;
  }

  apply_thread_env();

  if (*presets) {
    try {
      if (!dump.empty()) {
        std::cout << eqed::preset(eqed::experiment_kind_from_string(dump)).dump(2) << '\n';
        return kOk;
      }
      for (const auto& name : eqed::preset_names())
        std::cout << name << "\t" << eqed::preset_description(eqed::experiment_kind_from_string(name)) << '\n';
      return kOk;
    } catch (const eqed::ConfigError& e) {
      return report_error(e, kSchema);
    }
  }

  if (*validate) {
    nlohmann::json out;
    try {
      const auto cfg = eqed::resolve_config(load_document(config_path), overrides);
      const auto rep = eqed::preflight(cfg);
      out = rep.to_json();
      out["experiment"] = eqed::to_string(cfg.kind);
    } catch (const eqed::ConfigError& e) {
      out = {{"ok", false}, {"checks", {{{"check", "schema"}, {"status", "fail"}, {"detail", e.what()}}}}};
    }
    std::cout << out.dump(2) << '\n';
    return strict && !out["ok"].get<bool>() ? kReportFailed : kOk;
  }

  try {
    if (*seed_opt) overrides.push_back("seed=" + std::to_string(seed));
    if (!out_dir.empty()) overrides.push_back("output=" + nlohmann::json(out_dir).dump());
    const auto cfg = eqed::resolve_config(load_document(config_path), overrides);
    eqed::RunOptions opt;
    opt.force = force;
    const auto res = eqed::run_experiment(cfg, opt, std::cerr);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << (res.output_dir / "manifest.json").string() << '\n';
    return kOk;
  } catch (const eqed::ConfigError& e) {
    return report_error(e, kSchema);
  } catch (const eqed::PhysicsValidityError& e) {
    return report_error(e, kPhysics);
  } catch (const eqed::KernelSingularity& e) {
    return report_error(e, kPhysics);
  } catch (const eqed::InvalidArgument& e) {
    return report_error(e, kPhysics);
  } catch (const std::exception& e) {
    return report_error(e, kNumeric);
  }
}
