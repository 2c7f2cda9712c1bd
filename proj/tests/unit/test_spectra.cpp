#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

#include "eqed/effective_model.hpp"
#include "eqed/error.hpp"
#include "eqed/resolvent.hpp"
#include "eqed/spectra.hpp"

using namespace eqed;

namespace {

struct Setup {
  EmitterLayout layout;
  CouplingSystem system;
  BareParameters bare;
};

Setup empty_cavity(double kappa, double delta_c) {
  Setup s;
  s.layout.g0_A = 0.0;
  s.layout.gamma_A = 0.1;
  s.system = assemble(s.layout);
  s.bare = bare_parameters(s.layout, delta_c, kappa);
  return s;
}

Setup jaynes_cummings(double kappa, double gamma) {
  Setup s;
  s.layout.gamma_A = gamma;
  s.system = assemble(s.layout);
  s.bare = bare_parameters(s.layout, 0.0, kappa);
  return s;
}

Setup small_cube() {
  Setup s;
  s.layout = testing_support::fig1_cube(4);
  s.system = assemble(s.layout);
  s.bare = bare_parameters(s.layout, 0.0, 2.0);
  return s;
}

HilbertConfig cutoff(int n) {
  HilbertConfig h;
  h.n_photon_max = n;
  return h;
}

}  // namespace

TEST_CASE("empty cavity transmits a unit Lorentzian") {
  const auto s = empty_cavity(2.0, 0.5);
  const auto grid = SweepGrid::uniform(-6.0, 6.0, 61);
  const auto t = transmission_oscillator(s.system, s.bare, grid, ResolventMethod::Direct);
  for (const auto& p : t.points) {
    const double d = p.omega_L - 0.5;
    CHECK(p.T_c == doctest::Approx(4.0 / (4.0 + d * d)).epsilon(1e-12));
  }
  const auto pk = peak_analysis(t);
  REQUIRE(pk.peaks.size() == 1);
  CHECK(pk.peaks[0].position == doctest::Approx(0.5).epsilon(1e-3));
  CHECK_FALSE(pk.half_splitting.has_value());
}

TEST_CASE("oscillator transmission does not depend on the drive") {
  const auto s = small_cube();
  const DirectResolvent r(s.system);
  const auto pts = laser_frame_points(r, s.bare, SweepGrid::uniform(-4, 4, 41));
  const auto a = transmission_oscillator(pts, s.bare, 0.1);
  const auto b = transmission_oscillator(pts, s.bare, 0.2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(a.points[i].T_c == doctest::Approx(b.points[i].T_c).epsilon(1e-14));
    CHECK(std::abs(2.0 * a.points[i].alpha - b.points[i].alpha) <= 1e-14 * std::abs(b.points[i].alpha));
  }
}

TEST_CASE("reduced and full amplitude routes agree") {
  const auto s = small_cube();
  const auto grid = SweepGrid::uniform(-4, 4, 33);
  const auto a = transmission_oscillator(s.system, s.bare, grid, ResolventMethod::Direct, OscillatorRoute::Reduced);
  const auto b = transmission_oscillator(s.system, s.bare, grid, ResolventMethod::Direct, OscillatorRoute::Full);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].T_c == doctest::Approx(b.points[i].T_c).epsilon(1e-9));
    CHECK(a.points[i].P_B == doctest::Approx(b.points[i].P_B).epsilon(1e-8));
  }
}

TEST_CASE("eigen-shift sweep equals per-point solves") {
  const auto L = testing_support::random_layout(50, 31);
  const auto sys = assemble(L);
  const auto bare = bare_parameters(L, 0.0, 2.0);
  const auto grid = SweepGrid::uniform(-5, 5, 51);
  const auto a = transmission_oscillator(sys, bare, grid, ResolventMethod::Direct);
  const auto b = transmission_oscillator(sys, bare, grid, ResolventMethod::Modal);
  const auto c = transmission_oscillator(sys, bare, grid, ResolventMethod::Hessenberg);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(std::abs(b.points[i].T_c - a.points[i].T_c) <= 1e-8 * a.points[i].T_c);
    CHECK(std::abs(c.points[i].T_c - a.points[i].T_c) <= 1e-8 * a.points[i].T_c);
  }
}

TEST_CASE("driven empty cavity: unit peak and coherent statistics") {
  const auto s = empty_cavity(2.0, 0.0);
  const DirectResolvent r(s.system);
  const auto pts = laser_frame_points(r, s.bare, SweepGrid::uniform(-1, 1, 5));
  DrivenOptions o;
  o.hilbert = cutoff(3);
  o.check_cutoff = true;
  const auto g = g2_sweep(pts, s.bare, o);
  CHECK(g.phi == doctest::Approx(0.2));
  CHECK(g.points[2].T_c == doctest::Approx(1.0).epsilon(0.01));
  for (const auto& p : g.points) CHECK(*p.g2 == doctest::Approx(1.0).epsilon(0.01));
  REQUIRE(g.cutoff_change_T_c.has_value());
  CHECK(*g.cutoff_change_T_c <= 0.01);
  CHECK(*g.cutoff_change_g2 <= 0.01);
}

TEST_CASE("weak-drive density matrix matches the oscillator") {
  const auto s = jaynes_cummings(2.0, 0.5);
  const DirectResolvent r(s.system);
  const auto pts = laser_frame_points(r, s.bare, SweepGrid::uniform(-4, 4, 41));
  const auto osc = transmission_oscillator(pts, s.bare);
  DrivenOptions o;
  o.phi = 0.02;
  o.hilbert = cutoff(3);
  const auto dm = transmission_density_matrix(pts, s.bare, o);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(std::abs(dm.points[i].T_c - osc.points[i].T_c) <= 0.01 * osc.points[i].T_c);
}

TEST_CASE("default grid spans the polaritons") {
  EffectiveParameters p;
  p.delta_c_eff = 0.3;
  p.g_A_eff = -4.0;
  const auto g = default_grid(p, 2.0);
  REQUIRE(g.omega_L.size() == 401);
  CHECK(g.omega_L.front() == doctest::Approx(0.3 - 12.0));
  CHECK(g.omega_L.back() == doctest::Approx(0.3 + 12.0));
  CHECK_NOTHROW(g.validate());
  SweepGrid bad;
  bad.omega_L = {0.0, 1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(SweepGrid{}.validate(), InvalidArgument);
}

TEST_CASE("peak analysis of a synthetic doublet") {
  std::vector<double> x, y;
  for (int i = 0; i <= 800; ++i) {
    const double w = -4.0 + 0.01 * i;
    x.push_back(w);
    y.push_back(1.0 / (1.0 + std::pow((w + 1.3) / 0.1, 2)) + 0.6 / (1.0 + std::pow((w - 1.7) / 0.1, 2)));
  }
  const auto pk = peak_analysis(x, y);
  REQUIRE(pk.peaks.size() == 2);
  CHECK(*pk.lower == doctest::Approx(-1.3).epsilon(1e-3));
  CHECK(*pk.upper == doctest::Approx(1.7).epsilon(1e-3));
  CHECK(*pk.half_splitting == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(*pk.asymmetry == doctest::Approx(0.6).epsilon(1e-2));
}

TEST_CASE("parabolic refinement is exact for a parabola") {
  std::vector<double> x, y;
  for (int i = 0; i <= 20; ++i) {
    x.push_back(-1.0 + 0.1 * i);
    y.push_back(2.0 - std::pow(x.back() - 0.37, 2));
  }
  const auto pk = peak_analysis(x, y);
  REQUIRE(pk.peaks.size() == 1);
  CHECK(pk.peaks[0].position == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(pk.peaks[0].height == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("output formats") {
  const auto s = empty_cavity(1.0, 0.0);
  const auto t = transmission_oscillator(s.system, s.bare, SweepGrid::uniform(-1, 1, 3), ResolventMethod::Direct);
  std::ostringstream os;
  write_spectrum_csv(os, t);
  CHECK(os.str().rfind("omega_L,T_c,g2,P_B,valid\n", 0) == 0);
  const auto j = nlohmann::json::parse(spectrum_sidecar_json(t));
  CHECK(j.at("method").get<std::string>().rfind("oscillator", 0) == 0);
  CHECK(j.at("points") == 3);
  CHECK_FALSE(g2_minimum(t).has_value());
}
