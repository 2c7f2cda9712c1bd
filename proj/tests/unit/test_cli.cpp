#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(SIMULATE_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch() {
  const auto d = fs::temp_directory_path() / "eqed_cli_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("presets are listed") {
  const auto r = run("presets");
  CHECK(r.code == 0);
  CHECK(r.out.find("fig3_siv") != std::string::npos);
  const auto d = run("presets --dump fig2_map");
  CHECK(d.code == 0);
  CHECK(nlohmann::json::parse(d.out).at("experiment") == "fig2_map");
}

TEST_CASE("schema violations exit with 2") {
  const auto dir = scratch();
  std::ofstream(dir / "bad.json") << R"({"experiment": "custom", "physics": {"kapa": 2}})";
  CHECK(run("run " + (dir / "bad.json").string()).code == 2);
  CHECK(run("run custom --set physics.kappa=abc").code == 2);
  CHECK(run("run " + (dir / "missing.json").string()).code == 2);
  CHECK(run("run").code == 2);
}

TEST_CASE("physics validity failures exit with 3 unless forced") {
  const auto dir = scratch();
  CHECK(run("run custom --set ensemble.spacing=0 --out " + (dir / "z").string()).code == 3);
  CHECK(run("run custom --set drive.n_photon_max=5000 --out " + (dir / "z").string()).code == 3);
  // a resonant ensemble breaks the elimination
  const std::string resonant = "run custom --set physics.delta_B=0 --set ensemble.shape=point --set sweep.points=11 --out ";
  CHECK(run(resonant + (dir / "r").string()).code == 3);
  CHECK(run(resonant + (dir / "r").string() + " --force").code == 0);
}

TEST_CASE("validate reports without running") {
  const auto r = run("validate custom --set ensemble.spacing=0");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("ok") == false);
  CHECK(run("validate custom --set ensemble.spacing=0 --strict").code == 1);
  const auto s = nlohmann::json::parse(run("validate custom --set physics.kapa=1").out);
  CHECK(s.at("checks")[0].at("check") == "schema");
  CHECK(s.at("checks")[0].at("status") == "fail");
}

TEST_CASE("a run writes outputs and a manifest") {
  const auto dir = scratch() / "ok";
  fs::remove_all(dir);
  const auto r = run("run custom --set ensemble.n_side=2 --set sweep.points=21 --seed 5 --out " + dir.string());
  CHECK(r.code == 0);
  const auto m = nlohmann::json::parse(std::ifstream(dir / "manifest.json"));
  CHECK(m.at("seed") == 5);
  CHECK(m.at("resolved_config").at("seed") == 5);
  CHECK(fs::exists(dir / "spectrum_oscillator.csv"));
  CHECK(fs::exists(dir / "g2.csv"));
}
