#include <cmath>
#include <complex>

#include "doctest.h"

#include "eqed/dipole_kernel.hpp"
#include "eqed/error.hpp"

using namespace eqed;

namespace {

// Three-term sum in long double, used as an independent reference.
std::complex<long double> reference_kernel(long double xi, long double theta) {
  using C = std::complex<long double>;
  const long double s2 = std::sin(theta) * std::sin(theta);
  const long double near = 3.0L * std::cos(theta) * std::cos(theta) - 1.0L;
  const C e = std::exp(C(0, xi));
  return -1.5L * (s2 * e / xi + near * (e / (xi * xi * xi) - C(0, 1) * e / (xi * xi)));
}

}  // namespace

TEST_CASE("kernel matches an extended-precision reference") {
  for (double xi : {1e-2, 0.3, 1.0, 7.5, 100.0}) {
    for (double th : {0.0, 0.4, 1.0, 1.5707963267948966, 2.5}) {
      const Position3 r{std::sin(th) * xi / kTwoPi, 0.0, std::cos(th) * xi / kTwoPi};
      const auto k = coupling_kernel(r, 1.0, 1.0);
      const auto ref = reference_kernel(xi, th);
      const double scale = std::abs(std::complex<double>(ref)) + 1.0;
      CHECK(std::abs(k.V.real() - double(ref.real())) <= 1e-12 * scale);
      CHECK(std::abs(k.V.imag() - double(ref.imag())) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("real and imaginary parts map to exchange and correlated decay") {
  const auto k = coupling_kernel({0.01, 0.02, 0.03}, 0.5, 2.0);
  CHECK(k.omega == k.V.real());
  CHECK(k.gamma_cross == -k.V.imag());
}

TEST_CASE("far-field values at xi = 100, theta = pi/2") {
  const double xi = 100.0;
  const auto gf = normalized_kernel(xi, 0.0);
  CHECK(std::abs(gf.g) <= 1.5 / xi + 1.5 / (xi * xi) + 1.5 / (xi * xi * xi));
  const auto ref = reference_kernel(xi, 1.5707963267948966L);
  CHECK(gf.g == doctest::Approx(double(ref.real())).epsilon(1e-12));
  CHECK(gf.f == doctest::Approx(double(-ref.imag())).epsilon(1e-12));
}

TEST_CASE("g and f decay below 0.05 at xi = 100 for all angles") {
  for (int i = 0; i <= 50; ++i) {
    const double c = std::cos(3.141592653589793 * i / 50.0);
    const auto gf = normalized_kernel(100.0, c);
    CHECK(std::abs(gf.g) < 0.05);
    CHECK(std::abs(gf.f) < 0.05);
  }
}

TEST_CASE("f tends to one at vanishing separation along every angle") {
  for (int i = 0; i <= 20; ++i) {
    const double c = std::cos(3.141592653589793 * i / 20.0);
    CHECK(normalized_kernel(1e-8, c).f == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(normalized_kernel(1e-4, c).f == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("small-xi series agrees with the closed form at the switch point") {
  // f = 1 - xi^2 (1 + sin^2)/10 + O(xi^4) from expanding the three terms
  for (double c : {0.0, 0.3, 0.7, 1.0}) {
    const double xi = 1e-3;
    const double s2 = 1.0 - c * c;
    const double series = 1.0 - xi * xi * (1.0 + s2) / 10.0;
    CHECK(normalized_kernel(xi, c).f == doctest::Approx(series).epsilon(1e-12));
    const double t = kSeriesThreshold;
    CHECK(normalized_kernel(t * (1 - 1e-12), c).f == doctest::Approx(normalized_kernel(t * (1 + 1e-12), c).f).epsilon(1e-12));
  }
}

TEST_CASE("|f| stays below one on a grid") {
  for (int a = 0; a <= 60; ++a) {
    const double xi = 1e-3 * std::pow(10.0, a / 12.0);
    for (int b = 0; b <= 18; ++b) {
      const double c = std::cos(3.141592653589793 * b / 18.0);
      CHECK(std::abs(normalized_kernel(xi, c).f) <= 1.0 + 1e-6);
    }
  }
}

TEST_CASE("magic angle removes the near-field terms") {
  const double c = 1.0 / std::sqrt(3.0);
  const double s = std::sqrt(1.0 - c * c);
  const double rr = 0.013;
  const auto k = coupling_kernel({s * rr, 0.0, c * rr}, 1.0, 1.0);
  const double xi = kTwoPi * rr;
  const std::complex<double> expect = -1.0 * (2.0 / 3.0) * 1.5 * std::exp(std::complex<double>(0, xi)) / xi;
  CHECK(k.V.real() == doctest::Approx(expect.real()).epsilon(1e-12));
  CHECK(k.V.imag() == doctest::Approx(expect.imag()).epsilon(1e-12));
}

TEST_CASE("normalized kernel is independent of the rates; exchange symmetric") {
  const Position3 r{0.02, -0.01, 0.04};
  const auto a = normalized_g_f(r, 1.0, 1.0);
  const auto b = normalized_g_f(r, 4.0, 9.0);
  CHECK(a.g == b.g);
  CHECK(a.f == b.f);
  const auto k1 = coupling_kernel(r, 4.0, 9.0);
  const auto k2 = coupling_kernel(-r, 9.0, 4.0);
  CHECK(k1.V == k2.V);
  CHECK(k1.omega == doctest::Approx(6.0 * a.g));
}

TEST_CASE("coinciding emitters raise a kernel singularity") {
  CHECK_THROWS_AS(coupling_kernel({0, 0, 0}, 1, 1), KernelSingularity);
  CHECK_THROWS_AS(coupling_kernel({1e-7, 0, 0}, 1, 1), KernelSingularity);
  CHECK_NOTHROW(coupling_kernel({2e-6, 0, 0}, 1, 1));
}

TEST_CASE("cavity coupling follows the standing wave with its sign") {
  CHECK(cavity_coupling({0, 0, 0}, 2.0) == 2.0);
  CHECK(std::abs(cavity_coupling({0, 0.25, 0}, 2.0)) < 1e-15);
  CHECK(std::abs(cavity_coupling({0, -0.25, 0}, 2.0)) < 1e-15);
  CHECK(cavity_coupling({0, 0.5, 0}, 2.0) == doctest::Approx(-2.0));
}
