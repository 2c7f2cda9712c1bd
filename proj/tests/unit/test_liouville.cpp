#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

#include "eqed/effective_model.hpp"
#include "eqed/error.hpp"
#include "eqed/liouville.hpp"

using namespace eqed;

namespace {

HilbertConfig hilbert(int n_max, int spins = 1) {
  HilbertConfig h;
  h.n_photon_max = n_max;
  h.n_two_level_systems = spins;
  return h;
}

EffectiveParameters params(double g, double kappa, double gamma, double mu = 0.0, double dc = 0.0, double dA = 0.0) {
  EffectiveParameters p;
  p.g_A_eff = g;
  p.kappa_eff = kappa;
  p.gamma_A_eff = gamma;
  p.mu = mu;
  p.delta_c_eff = dc;
  p.delta_A_eff = dA;
  return p;
}

CMatrix random_matrix(Eigen::Index d, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  CMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return m;
}

CMatrix random_hermitian(Eigen::Index d, std::uint64_t seed) {
  const CMatrix m = random_matrix(d, seed);
  return 0.5 * (m + m.adjoint());
}

// N = 1 point dipole at a panel-a style placement, driven.
Superoperator full_model(bool drive) {
  EmitterLayout L;
  L.gamma_A = 0.01;
  L.gamma_B = 100.0;
  L.g0_B = 100.0;
  L.ensemble = {{0.0, 0.0, 0.05}};
  L.detunings = {1000.0};
  const auto bare = bare_parameters(L, 0.1, 2.0);
  std::optional<Drive> d;
  if (drive) d = Drive{0.2, 0.5};
  return build_full_liouvillian(L, bare, d, hilbert(3));
}

}  // namespace

TEST_CASE("hilbert space bounds") {
  CHECK_THROWS_AS(hilbert(0).validate(), InvalidArgument);
  HilbertConfig h = hilbert(4, 10);
  CHECK_THROWS_AS(h.validate(), InvalidArgument);
  h.dimension_limit = 6000;
  CHECK_NOTHROW(h.validate());
  CHECK(hilbert(3, 2).index(2, {0}) == 2 * 4 + 2);
  CHECK(hilbert(3, 2).index(1, {1}) == 4 + 1);
}

TEST_CASE("operators") {
  const auto h = hilbert(4);
  const CMatrix a = CMatrix(annihilation(h));
  const CMatrix ad = a.adjoint();
  const CMatrix comm = a * ad - ad * a;
  for (int n = 0; n < 4; ++n)
    for (int s = 0; s < 2; ++s) CHECK(std::abs(comm(h.index(n, s ? std::vector<int>{0} : std::vector<int>{}),
                                                     h.index(n, s ? std::vector<int>{0} : std::vector<int>{})) - 1.0) < 1e-14);
  const CMatrix sm = CMatrix(lowering(h, 0));
  CHECK(std::abs(sm(h.index(2), h.index(2, {0})) - 1.0) < 1e-15);
  CHECK((sm * sm).norm() == 0.0);
  CHECK((a * sm - sm * a).norm() < 1e-15);
}

TEST_CASE("generators preserve trace and hermiticity") {
  for (bool drive : {false, true}) {
    const auto L = full_model(drive);
    const auto d = static_cast<Eigen::Index>(L.dimension());
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const CMatrix rho = random_hermitian(d, seed);
      const CMatrix out = L.apply(rho);
      CHECK(std::abs(out.trace()) <= 1e-10 * rho.norm());
      CHECK((out - out.adjoint()).norm() <= 1e-10 * out.norm());
      const CMatrix m = random_matrix(d, seed + 10);
      CHECK((L.apply(CMatrix(m.adjoint())) - L.apply(m).adjoint()).norm() <= 1e-10 * L.apply(m).norm());
      CHECK((L.apply_matrix_free(m) - L.apply(m)).norm() <= 1e-12 * L.apply(m).norm());
    }
  }
  const auto E = build_effective_liouvillian(params(1.3, 2.0, 0.4, 0.3, 0.2, -0.1), 0.5, hilbert(3));
  const CMatrix rho = random_hermitian(8, 9);
  CHECK(std::abs(E.apply(rho).trace()) <= 1e-10 * rho.norm());
}

TEST_CASE("dense copy agrees with the sparse generator") {
  const auto E = build_effective_liouvillian(params(1.0, 2.0, 0.1, 0.05), 0.2, hilbert(2));
  REQUIRE(E.has_matrix());
  CHECK((E.dense() - CMatrix(E.matrix())).norm() == 0.0);
}

TEST_CASE("bare cavity photon decays at twice kappa") {
  EmitterLayout L;
  L.g0_A = 0.0;
  L.gamma_A = 0.01;
  const double kappa = 1.3;
  const auto G = build_full_liouvillian(L, bare_parameters(L, 0.0, kappa), std::nullopt, hilbert(3));
  std::vector<double> t;
  for (int i = 0; i <= 20; ++i) t.push_back(0.1 * i);
  const auto tr = evolve(G, DensityMatrix::fock(G.hilbert(), 1), t);
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(tr.observables[i].photon_number == doctest::Approx(std::exp(-2.0 * kappa * t[i])).epsilon(1e-7));
}

TEST_CASE("uncoupled effective model factorizes into independent decays") {
  const auto E = build_effective_liouvillian(params(0.0, 1.0, 0.25), std::nullopt, hilbert(2));
  const auto h = E.hilbert();
  const std::vector<double> t{0.0, 0.5, 1.0, 2.0};
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(h.dimension()));
  psi(static_cast<Eigen::Index>(h.index(1, {0}))) = 1.0;
  const auto tr = evolve(E, DensityMatrix::pure(h, psi), t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(tr.observables[i].photon_number == doctest::Approx(std::exp(-2.0 * t[i])).epsilon(1e-7));
    CHECK(tr.observables[i].population_A == doctest::Approx(std::exp(-0.5 * t[i])).epsilon(1e-7));
  }
}

TEST_CASE("without generator terms the state is constant") {
  const auto h = hilbert(2);
  const Superoperator Z(h, SparseCMatrix(static_cast<Eigen::Index>(h.dimension()), static_cast<Eigen::Index>(h.dimension())),
                        {}, Eigen::MatrixXd(0, 0));
  CVector psi = CVector::Constant(static_cast<Eigen::Index>(h.dimension()), 1.0);
  const auto rho0 = DensityMatrix::pure(h, psi);
  EvolveOptions o;
  o.keep_states = true;
  const auto tr = evolve(Z, rho0, {0.0, 1.0, 5.0}, o);
  CHECK((tr.states.back().rho - rho0.rho).norm() < 1e-12);
}

TEST_CASE("evolution stays a valid density matrix") {
  const auto G = full_model(true);
  EvolveOptions o;
  o.keep_states = true;
  std::vector<double> t;
  for (int i = 0; i <= 10; ++i) t.push_back(0.2 * i);
  const auto tr = evolve(G, DensityMatrix::fock(G.hilbert(), 1), t, o);
  for (const auto& s : tr.states) {
    CHECK(s.trace_error() <= 1e-8);
    CHECK(s.hermiticity_error() <= 1e-10);
    CHECK(s.min_eigenvalue() >= -1e-8);
  }
}

TEST_CASE("steady state") {
  SUBCASE("undriven damped cavity relaxes to vacuum") {
    const auto E = build_effective_liouvillian(params(0.5, 1.0, 0.2), std::nullopt, hilbert(3));
    const auto ss = steady_state(E);
    CHECK(std::abs(ss.rho(0, 0) - 1.0) < 1e-10);
  }
  SUBCASE("matches long-time integration") {
    const auto p = params(1.0, 2.0, 1.0, 0.3, 0.4, -0.2);
    const auto E = build_effective_liouvillian(p, 0.6, hilbert(3));
    const auto ss = steady_state(E);
    CHECK_NOTHROW(ss.validate());
    const double gmin = gamma_pm(p).gamma_minus;
    EvolveOptions o;
    o.keep_states = true;
    o.rtol = 1e-10;
    o.atol = 1e-12;
    const auto tr = evolve(E, DensityMatrix::fock(E.hilbert(), 0), {0.0, 20.0 / gmin}, o);
    CHECK((tr.states.back().rho - ss.rho).norm() <= 1e-6);
  }
  SUBCASE("weakly driven empty cavity") {
    const double kappa = 2.0, phi = 0.02, dc = 0.7;
    const auto E = build_effective_liouvillian(params(0.0, kappa, 0.1, 0.0, dc, 0.0), phi, hilbert(3));
    const auto o = observables(steady_state(E));
    CHECK(o.photon_number == doctest::Approx(phi * phi / (kappa * kappa + dc * dc)).epsilon(1e-6));
    CHECK(o.population_A == doctest::Approx(0.0));
  }
  SUBCASE("undamped degenerate generator is refused") {
    const auto E = build_effective_liouvillian(params(0.0, 0.0, 0.0), std::nullopt, hilbert(1));
    CHECK_THROWS_AS(steady_state(E), DegenerateNullSpace);
  }
}

TEST_CASE("g2 of reference states") {
  const auto h = hilbert(12);
  const double alpha = 0.5;
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(h.dimension()));
  double fact = 1.0;
  for (int n = 0; n <= 12; ++n) {
    if (n) fact *= n;
    psi(static_cast<Eigen::Index>(h.index(n))) = std::exp(-alpha * alpha / 2) * std::pow(alpha, n) / std::sqrt(fact);
  }
  CHECK(g2_zero(DensityMatrix::pure(h, psi)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(g2_zero(DensityMatrix::fock(h, 1)) == 0.0);
  CHECK(g2_zero(DensityMatrix::fock(h, 2)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(g2_zero(DensityMatrix::fock(h, 0)), UndefinedObservable);
  CHECK_FALSE(observables(DensityMatrix::fock(h, 0)).g2_zero.has_value());
}

TEST_CASE("driven steady state converges in the Fock cutoff") {
  const auto p = params(1.0, 2.0, 0.01, 0.0, 0.0, 0.0);
  for (double w : {-1.0, 0.0, 1.0}) {
    auto q = p;
    q.delta_c_eff -= w;
    q.delta_A_eff -= w;
    const auto o3 = observables(steady_state(build_effective_liouvillian(q, 0.2, hilbert(3))));
    const auto o4 = observables(steady_state(build_effective_liouvillian(q, 0.2, hilbert(4))));
    CHECK(std::abs(o4.photon_number - o3.photon_number) <= 0.01 * o4.photon_number);
    CHECK(std::abs(*o4.g2_zero - *o3.g2_zero) <= 0.01 * *o4.g2_zero);
  }
}

TEST_CASE("density matrix validation and state files") {
  const auto h = hilbert(2);
  auto rho = DensityMatrix::fock(h, 1);
  CHECK_NOTHROW(rho.validate());
  auto bad = rho;
  bad.rho(0, 1) = 0.1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = rho;
  bad.rho(0, 0) = 0.5;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);

  std::stringstream ss;
  const auto s = steady_state(build_effective_liouvillian(params(1.0, 2.0, 0.1, 0.02), 0.3, h));
  write_state(ss, s);
  CHECK((read_state(ss, h).rho - s.rho).norm() == 0.0);
}

TEST_CASE("full model refuses oversize spaces and coinciding emitters") {
  auto L = testing_support::random_layout(12, 1);
  CHECK_THROWS_AS(build_full_liouvillian(L, bare_parameters(L, 0, 1), std::nullopt, hilbert(3)), InvalidArgument);
  L.ensemble.resize(1);
  L.detunings.resize(1);
  L.ensemble[0] = L.target;
  CHECK_THROWS_AS(build_full_liouvillian(L, bare_parameters(L, 0, 1), std::nullopt, hilbert(3)), KernelSingularity);
}
