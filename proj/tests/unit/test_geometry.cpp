#include <cmath>

#include "doctest.h"

#include "eqed/error.hpp"
#include "eqed/geometry.hpp"

using namespace eqed;

namespace {

EmitterLayout cube(int n, double d, double delta = 1000.0) {
  EmitterLayout L;
  L.gamma_A = L.gamma_B = 0.01;
  L.ensemble = build_centered_cube(n, d, {0, 0, 0.05});
  L.detunings.assign(L.ensemble.size(), delta);
  return L;
}

}  // namespace

TEST_CASE("lattice enumerates z fastest, then y, then x") {
  const auto p = build_cubic_lattice(2, 0.5, {1, 2, 3});
  REQUIRE(p.size() == 8);
  CHECK(p[0] == Position3{1, 2, 3});
  CHECK(p[1] == Position3{1, 2, 3.5});
  CHECK(p[2] == Position3{1, 2.5, 3});
  CHECK(p[4] == Position3{1.5, 2, 3});
  CHECK(build_cubic_lattice(3, 0.1, {}) == build_cubic_lattice(3, 0.1, {}));
}

TEST_CASE("lattice rejects bad arguments") {
  CHECK_THROWS_AS(build_cubic_lattice(0, 1.0, {}), InvalidArgument);
  CHECK_THROWS_AS(build_cubic_lattice(2, 0.0, {}), InvalidArgument);
}

TEST_CASE("centred cube has its centroid at the requested centre") {
  const Position3 c{0.1, -0.2, 0.3};
  for (int n : {1, 2, 5}) {
    const auto p = build_centered_cube(n, 1e-3, c);
    const auto m = centroid(p);
    CHECK(m.x == doctest::Approx(c.x).epsilon(1e-12));
    CHECK(m.y == doctest::Approx(c.y).epsilon(1e-12));
    CHECK(m.z == doctest::Approx(c.z).epsilon(1e-12));
  }
  const auto corner = centroid(build_cubic_lattice(2, 0.2, {}));
  CHECK(corner.x == doctest::Approx(0.1));
  CHECK(corner.y == doctest::Approx(0.1));
  CHECK(corner.z == doctest::Approx(0.1));
}

TEST_CASE("point-dipole collapse") {
  SUBCASE("single emitter is unchanged") {
    auto L = cube(1, 1e-3);
    CHECK(collapse_to_point_dipole(L) == L);
  }
  SUBCASE("N identical dipoles give sqrt(N) coupling and N-fold decay") {
    EmitterLayout L;
    L.g0_A = L.g0_B = 1.0;
    L.gamma_A = L.gamma_B = 0.01;
    for (int i = 0; i < 100; ++i) L.ensemble.push_back({0.001 * i, 0.0, 0.1});
    L.detunings.assign(100, 1000.0);
    const auto P = collapse_to_point_dipole(L);
    REQUIRE(P.size() == 1);
    CHECK(P.g0_B == doctest::Approx(10.0));
    CHECK(P.gamma_B == doctest::Approx(1.0));
    CHECK(P.g0_B * P.g0_B == doctest::Approx(100.0 * L.g0_A * L.g0_A));
    CHECK(P.ensemble[0].x == doctest::Approx(0.0495));
  }
  SUBCASE("mixed detunings are rejected") {
    auto L = cube(2, 1e-3);
    L.detunings[3] = 999.0;
    CHECK_THROWS_AS(collapse_to_point_dipole(L), InvalidArgument);
  }
}

TEST_CASE("positional disorder") {
  const auto L = cube(12, 1e-3);
  DisorderSpec s{DisorderKind::Positional, 0.0, 1e-3, 9, 1};
  CHECK(apply_positional_disorder(L, s) == L);

  s.strength = 0.02;
  const auto D = apply_positional_disorder(L, s);
  double worst = 0.0;
  for (std::size_t j = 0; j < L.size(); ++j) {
    const auto d = D.ensemble[j] - L.ensemble[j];
    worst = std::max({worst, std::abs(d.x), std::abs(d.y), std::abs(d.z)});
  }
  CHECK(worst <= 0.01 * 1e-3);
  CHECK(worst > 0.0);
  CHECK(apply_positional_disorder(L, s) == D);
  CHECK(D.detunings == L.detunings);

  s.seed = 10;
  CHECK_FALSE(apply_positional_disorder(L, s) == D);
}

TEST_CASE("spectral disorder") {
  const auto L = cube(12, 1e-3);
  DisorderSpec s{DisorderKind::Spectral, 0.0, 1e-3, 3, 1};
  CHECK(apply_spectral_disorder(L, s) == L);

  s.strength = 500.0;
  const auto D = apply_spectral_disorder(L, s);
  for (double d : D.detunings) {
    CHECK(d >= 750.0);
    CHECK(d <= 1250.0);
  }
  CHECK(D.ensemble == L.ensemble);
  CHECK(apply_spectral_disorder(L, s) == D);

  SUBCASE("sample mean within three standard errors") {
    EmitterLayout big = L;
    big.ensemble.clear();
    for (int i = 0; i < 10000; ++i) big.ensemble.push_back({0.01 * i, 0, 0});
    big.detunings.assign(10000, 1000.0);
    const auto B = apply_spectral_disorder(big, s);
    double mean = 0.0;
    for (double d : B.detunings) mean += d;
    mean /= 10000.0;
    const double se = 500.0 / std::sqrt(12.0) / 100.0;
    CHECK(std::abs(mean - 1000.0) < 3.0 * se);
  }
}

TEST_CASE("disorder kind mismatch is rejected") {
  const auto L = cube(2, 1e-3);
  DisorderSpec s{DisorderKind::Spectral, 0.1, 1e-3, 0, 1};
  CHECK_THROWS_AS(apply_positional_disorder(L, s), InvalidArgument);
  s.kind = DisorderKind::Positional;
  CHECK_THROWS_AS(apply_spectral_disorder(L, s), InvalidArgument);
}

TEST_CASE("layout validation catches coinciding emitters") {
  auto L = cube(2, 1e-3);
  CHECK_NOTHROW(L.validate());
  CHECK(min_pair_separation(L) == doctest::Approx(1e-3));
  L.ensemble[1] = L.ensemble[0];
  CHECK_THROWS_AS(L.validate(), KernelSingularity);
  auto T = cube(1, 1e-3);
  T.ensemble[0] = T.target;
  CHECK_THROWS_AS(T.validate(), KernelSingularity);
}

TEST_CASE("layout json round trip preserves disorder results") {
  const auto L = cube(3, 2e-3);
  nlohmann::json j = L;
  const auto back = j.get<EmitterLayout>();
  CHECK(back == L);
  DisorderSpec s{DisorderKind::Positional, 0.1, 2e-3, 4, 1};
  CHECK(apply_positional_disorder(back, s) == apply_positional_disorder(L, s));
}
