#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "eqed/resolvent.hpp"

using namespace eqed;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("eigen-shift and Hessenberg sweeps equal per-point direct solves") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const auto s = assemble(testing_support::random_layout(50, seed));
    const auto modes = eigenmodes(s);
    REQUIRE_FALSE(modes.flagged);
    const DirectResolvent direct(s);
    const ModalResolvent modal(s, modes);
    const HessenbergResolvent hess(s);
    for (double d : {-500.0, 0.0, 3.7, 640.0, 990.0, 1500.0}) {
      const auto a = direct.at(d);
      for (const Resolvent* r : {static_cast<const Resolvent*>(&modal), static_cast<const Resolvent*>(&hess)}) {
        const auto b = r->at(d);
        CHECK(rel(b.gg, a.gg) < 1e-8);
        CHECK(rel(b.gv, a.gv) < 1e-8);
        CHECK(rel(b.vv, a.vv) < 1e-8);
        CHECK(std::abs(b.norm_gg - a.norm_gg) <= 1e-8 * a.norm_gg);
        CHECK(std::abs(b.norm_vv - a.norm_vv) <= 1e-8 * a.norm_vv);
        CHECK(rel(b.cross_gv, a.cross_gv) < 1e-8);
      }
    }
  }
}

TEST_CASE("shifted assembly agrees with evaluating the resolvent off frame") {
  const auto L = testing_support::random_layout(10, 4);
  const DirectResolvent base(assemble(L, 0.0));
  const DirectResolvent moved(assemble(L, 25.0));
  const auto a = base.at(25.0);
  const auto b = moved.at(0.0);
  CHECK(rel(a.gg, b.gg) < 1e-12);
  CHECK(rel(a.gv, b.gv) < 1e-12);
}

TEST_CASE("Hessenberg eigenvalues match the dense eigen-solver") {
  const auto s = assemble(testing_support::random_layout(30, 9));
  auto a = HessenbergResolvent(s).eigenvalues();
  auto b = eigenvalues(s);
  auto key = [](cplx x, cplx y) { return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag()); };
  std::sort(a.data(), a.data() + a.size(), key);
  std::sort(b.data(), b.data() + b.size(), key);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9 * b.cwiseAbs().maxCoeff());
}

TEST_CASE("modal resolvent falls back when no usable modes are given") {
  const auto s = assemble(testing_support::random_layout(5, 1));
  CHECK(make_resolvent(s, ResolventMethod::Modal)->method() == ResolventMethod::Direct);
  const auto m = eigenmodes(s);
  CHECK(make_resolvent(s, ResolventMethod::Modal, &m)->method() == ResolventMethod::Modal);
  CHECK(resolvent_method_from_string("hessenberg") == ResolventMethod::Hessenberg);
}
