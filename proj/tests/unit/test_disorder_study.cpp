#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"

#include "eqed/disorder_study.hpp"
#include "eqed/effective_model.hpp"
#include "eqed/error.hpp"
#include "eqed/resolvent.hpp"

using namespace eqed;

namespace {

Campaign small_campaign(DisorderKind kind, double strength, int realizations, std::uint64_t seed = 17) {
  Campaign c;
  c.base = testing_support::fig1_cube(3);
  c.disorder = {kind, strength, 1e-3, seed, realizations};
  c.bare = bare_parameters(c.base, 0.0, 2.0);
  c.grid = SweepGrid::uniform(-3, 3, 31);
  return c;
}

}  // namespace

TEST_CASE("without disorder all realizations coincide with the single shot") {
  const auto c = small_campaign(DisorderKind::Spectral, 0.0, 6);
  const auto r = run_campaign(c);
  REQUIRE(r.failures == 0);
  const auto single = transmission_oscillator(assemble(c.base), c.bare, c.grid, ResolventMethod::Direct);
  for (const auto& rec : r.records) {
    CHECK(rec.g_A_eff == r.records[0].g_A_eff);
    CHECK(rec.T_c == r.records[0].T_c);
  }
  for (std::size_t i = 0; i < c.grid.omega_L.size(); ++i)
    CHECK(r.average_T_c[i] == doctest::Approx(single.points[i].T_c).epsilon(1e-10));
  const auto rep = small_W_consistency(r, 0.0, r.records[0].delta_g, {575.0, 0.0});
  CHECK(rep.relative_deviation == 0.0);
  CHECK(rep.warnings.size() == 1);
}

TEST_CASE("campaigns are deterministic") {
  const auto c = small_campaign(DisorderKind::Spectral, 500.0, 8);
  const auto a = run_campaign(c);
  const auto b = run_campaign(c);
  CHECK(a.average_T_c == b.average_T_c);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].seed == derive_seed(17, i));
    CHECK(a.records[i].seed == b.records[i].seed);
    CHECK(a.records[i].g_A_eff == b.records[i].g_A_eff);
    CHECK(a.records[i].T_c == b.records[i].T_c);
  }
  CHECK(a.order_by_population == b.order_by_population);
  for (std::size_t k = 1; k < a.order_by_population.size(); ++k)
    CHECK(a.records[a.order_by_population[k - 1]].P_B <= a.records[a.order_by_population[k]].P_B);
}

TEST_CASE("averaging is linear over partitions") {
  const auto r = run_campaign(small_campaign(DisorderKind::Spectral, 300.0, 9));
  std::vector<std::vector<double>> all, first, second;
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    all.push_back(r.records[i].T_c);
    (i < 4 ? first : second).push_back(r.records[i].T_c);
  }
  const auto m = ordered_mean(all), m1 = ordered_mean(first), m2 = ordered_mean(second);
  for (std::size_t j = 0; j < m.size(); ++j)
    CHECK(std::abs((4.0 * m1[j] + 5.0 * m2[j]) / 9.0 - m[j]) <= 1e-12 * std::abs(m[j]));
  CHECK(m == r.average_T_c);
}

TEST_CASE("realization grade agrees with the adiabaticity report") {
  const auto c = small_campaign(DisorderKind::Spectral, 1500.0, 5);
  const auto r = run_campaign(c);
  for (const auto& rec : r.records) {
    DisorderSpec s = c.disorder;
    s.seed = rec.seed;
    const auto sys = assemble(apply_spectral_disorder(c.base, s));
    const auto p = effective_parameters(sys, c.bare);
    CHECK(rec.g_A_eff == doctest::Approx(p.g_A_eff).epsilon(1e-9));
    const auto rep = adiabaticity_report(sys, {c.bare.kappa, c.bare.gamma_A, p.g_A_eff});
    REQUIRE(rec.grade.has_value());
    CHECK(*rec.grade == rep.grade);
    CHECK(rec.P_B == doctest::Approx(rep.one_photon_population).epsilon(1e-8));
  }
}

TEST_CASE("positional campaign without spectra uses direct solves") {
  auto c = small_campaign(DisorderKind::Positional, 0.1, 6);
  c.outputs = {false, false, true, false, false};
  const auto r = run_campaign(c);
  CHECK(r.average_T_c.empty());
  REQUIRE(r.histogram.has_value());
  std::size_t total = 0;
  for (auto n : r.histogram->counts) total += n;
  CHECK(total == 6);
  CHECK_FALSE(r.records[0].grade.has_value());
}

TEST_CASE("mostly failing campaigns are fatal") {
  auto c = small_campaign(DisorderKind::Spectral, 10.0, 4);
  c.base.ensemble[0] = c.base.target;
  CHECK_THROWS(run_campaign(c));
}

TEST_CASE("symmetric overlap") {
  SUBCASE("single emitter") {
    ModeSet m;
    m.eigenvalues = CVector::Constant(1, cplx(1000, -0.01));
    m.eigenvectors = CMatrix::Constant(1, 1, 1.0);
    CHECK(symmetric_overlap(m).amplitude[0] == doctest::Approx(1.0));
  }
  SUBCASE("orthogonal basis obeys the sum rule") {
    const int n = 12;
    const Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
    ModeSet m;
    m.eigenvalues = CVector::LinSpaced(n, 1.0, 2.0);
    m.eigenvectors = q.cast<cplx>();
    const auto o = symmetric_overlap(m);
    double sum = 0.0;
    for (double s : o.squared) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0 + 1e-12);
      sum += s;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("flagged sets are refused") {
    ModeSet m;
    m.flagged = true;
    CHECK_THROWS_AS(symmetric_overlap(m), NumericalFailure);
  }
}

TEST_CASE("mode report ranks contributions") {
  const auto s = assemble(testing_support::random_layout(15, 2));
  const auto rep = mode_report(s, eigenmodes(s));
  REQUIRE(rep.ranked.size() == 15);
  double sum = 0.0;
  for (std::size_t k = 0; k < rep.ranked.size(); ++k) {
    if (k) CHECK(std::abs(rep.ranked[k - 1].delta_g) >= std::abs(rep.ranked[k].delta_g));
    CHECK(rep.ranked[k].overlap >= 0.0);
    CHECK(rep.ranked[k].overlap <= 1.0 + 1e-12);
    sum += rep.ranked[k].delta_g;
  }
  CHECK(sum == doctest::Approx(delta_g_direct(s)).epsilon(1e-9));
}

TEST_CASE("histograms") {
  const std::vector<double> v{1, 2, 2, 3, 3, 3, 4, 4, 5, 9};
  const auto h = make_histogram(v, 4);
  REQUIRE(h.edges.size() == 5);
  CHECK(h.edges.front() == 1.0);
  CHECK(h.edges.back() == 9.0);
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  CHECK(total == v.size());
  CHECK(make_histogram(std::vector<double>(5, 2.0)).counts.size() == 1);
  CHECK(make_histogram(v).counts.size() >= 1);
  CHECK_THROWS_AS(make_histogram({}), InvalidArgument);
}

TEST_CASE("small-W report warns outside its regime") {
  const auto r = run_campaign(small_campaign(DisorderKind::Spectral, 400.0, 4));
  const auto rep = small_W_consistency(r, 400.0, r.records[0].delta_g, {575.0, 0.0});
  CHECK(rep.warnings.size() == 2);
  CHECK_FALSE(rep.quadratic_coefficient.has_value());
}

TEST_CASE("campaign directory layout") {
  auto c = small_campaign(DisorderKind::Spectral, 100.0, 3);
  c.outputs.per_realization_spectra = true;
  const auto r = run_campaign(c);
  const auto dir = std::filesystem::temp_directory_path() / "eqed_campaign_test";
  std::filesystem::remove_all(dir);
  write_campaign(dir, c, r);
  for (const char* f : {"manifest.json", "average.csv", "histogram.csv", "realizations.csv", "realization_0.csv"})
    CHECK(std::filesystem::exists(dir / f));
  std::ifstream h(dir / "histogram.csv");
  std::string header;
  std::getline(h, header);
  CHECK(header == "bin_left,bin_right,count");
  const auto m = nlohmann::json::parse(std::ifstream(dir / "manifest.json"));
  CHECK(m.at("seed") == 17);
  std::filesystem::remove_all(dir);
}
