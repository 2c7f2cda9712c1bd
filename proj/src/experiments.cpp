#include "eqed/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eqed/disorder_study.hpp"
#include "eqed/effective_model.hpp"
#include "eqed/ensemble_matrix.hpp"
#include "eqed/liouville.hpp"
#include "eqed/resolvent.hpp"
#include "eqed/spectra.hpp"

namespace eqed {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.141592653589793;

Position3 vec3(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

struct Writer {
  fs::path dir;
  RunResult* result;

  std::ofstream open(const std::string& name) {
    result->files.push_back(name);
    const fs::path p = dir / name;
    fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw NumericalFailure("cannot write " + p.string());
    return os;
  }
  void text(const std::string& name, const std::string& content) { open(name) << content << '\n'; }
  void spectrum(const std::string& stem, const SpectrumResult& s) {
    auto os = open(stem + ".csv");
    write_spectrum_csv(os, s);
    text(stem + ".json", spectrum_sidecar_json(s));
  }
};

void gate(const AdiabaticityReport& rep, const EffectiveParameters& p, const std::string& what,
          const RunOptions& opt, RunResult& res) {
  std::vector<std::string> problems;
  if (rep.grade == AdiabaticityGrade::Fail) {
    std::ostringstream os;
    os << "adiabaticity fail (min|lambda| / rate scale = " << rep.ratio << ", one-photon P_B = "
       << rep.one_photon_population << ")";
    problems.push_back(os.str());
  } else if (rep.grade == AdiabaticityGrade::Warn) {
    res.warnings.push_back(what + ": adiabaticity warn");
  }
  for (const auto& w : p.warnings()) problems.push_back(w);
  if (problems.empty()) return;
  std::string msg = what + ": " + problems.front();
  for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
  if (!opt.force) throw PhysicsValidityError(msg + " (use --force to proceed)");
  res.warnings.push_back(msg + " (forced)");
}

json report_json(const AdiabaticityReport& r) {
  return {{"grade", to_string(r.grade)},
          {"min_abs_eigenvalue", r.min_abs_eigenvalue},
          {"ratio", r.ratio},
          {"one_photon_population", r.one_photon_population}};
}

json params_json(const EffectiveParameters& p) {
  const auto rates = gamma_pm(p);
  return {{"delta_c_eff", p.delta_c_eff}, {"delta_A_eff", p.delta_A_eff}, {"g_A_eff", p.g_A_eff},
          {"kappa_eff", p.kappa_eff},     {"gamma_A_eff", p.gamma_A_eff}, {"mu", p.mu},
          {"gamma_plus", rates.gamma_plus}, {"gamma_minus", rates.gamma_minus}};
}

BareParameters cube_bare(const ExperimentConfig& cfg, const EmitterLayout& L) {
  return bare_parameters(L, cfg.number("physics.delta_c"), cfg.number("physics.kappa"));
}

HilbertConfig driven_hilbert(const ExperimentConfig& cfg) {
  HilbertConfig h;
  h.n_photon_max = cfg.integer("drive.n_photon_max");
  h.n_two_level_systems = 1;
  h.dimension_limit = static_cast<std::size_t>(cfg.integer("drive.dimension_limit"));
  return h;
}

// Everything needed to sweep one cube configuration.
struct CubeRun {
  EmitterLayout layout;
  CouplingSystem system;
  BareParameters bare;
  EffectiveParameters params;
  AdiabaticityReport report;
  std::unique_ptr<Resolvent> resolvent;
  SweepGrid grid;
};

CubeRun analyze_cube(const ExperimentConfig& cfg, int n_side) {
  CubeRun c;
  c.layout = cube_layout(cfg, n_side);
  c.system = assemble(c.layout, 0.0);
  c.bare = cube_bare(cfg, c.layout);
  const auto method = resolvent_method_from_string(cfg.at("sweep.resolvent").get<std::string>());
  CVector ev;
  if (c.system.size() == 0) {
    c.resolvent = make_resolvent(c.system, ResolventMethod::Direct);
  } else if (method == ResolventMethod::Modal) {
    const ModeSet modes = eigenmodes(c.system);
    ev = modes.eigenvalues;
    c.resolvent = make_resolvent(c.system, method, &modes);
  } else if (method == ResolventMethod::Hessenberg) {
    auto h = std::make_unique<HessenbergResolvent>(c.system);
    ev = h->eigenvalues();
    c.resolvent = std::move(h);
  } else {
    ev = eigenvalues(c.system);
    c.resolvent = make_resolvent(c.system, method);
  }
  c.params = effective_parameters(c.system, c.bare);
  if (c.system.size() > 0)
    c.report = adiabaticity_report(c.system, ev, {c.bare.kappa, c.bare.gamma_A, c.params.g_A_eff});
  const auto& s = cfg.at("sweep");
  if (s.at("min").is_null()) {
    c.grid = default_grid(c.params, c.bare.kappa, s.at("points").get<int>(), s.at("span_factor").get<double>());
  } else {
    c.grid = SweepGrid::uniform(s.at("min").get<double>(), s.at("max").get<double>(), s.at("points").get<int>());
  }
  return c;
}

DrivenOptions driven_options(const ExperimentConfig& cfg, double kappa, double phi_over_kappa, bool g2) {
  DrivenOptions o;
  o.phi = phi_over_kappa * kappa;
  o.hilbert = driven_hilbert(cfg);
  o.compute_g2 = g2;
  o.check_cutoff = cfg.at("drive.check_cutoff").get<bool>();
  return o;
}

json peaks_json(const PeakReport& pk) {
  json j = {{"count", pk.peaks.size()}};
  if (pk.half_splitting) {
    j["half_splitting"] = *pk.half_splitting;
    j["lower"] = *pk.lower;
    j["upper"] = *pk.upper;
    j["asymmetry_upper_over_lower"] = *pk.asymmetry;
  }
  return j;
}

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LinearFit f;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  const double mean = sy / n;
  double ss_tot = 0, ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

std::vector<int> int_list(const json& j) { return j.get<std::vector<int>>(); }

// ---------------------------------------------------------------- runners

void run_fig1_spectrum(const ExperimentConfig& cfg, const RunOptions& opt, Writer& w, RunResult& res,
                       std::ostream& log) {
  json rows = json::array();
  for (int n : int_list(cfg.at("scan.n_sides"))) {
    log << "fig1_spectrum: N = " << n << "^3\n";
    auto c = analyze_cube(cfg, n);
    gate(c.report, c.params, "N_side=" + std::to_string(n), opt, res);
    const auto pts = laser_frame_points(*c.resolvent, c.bare, c.grid);
    auto osc = transmission_oscillator(pts, c.bare);
    osc.method = std::string("oscillator-reduced/") + to_string(c.resolvent->method());
    const auto dm = transmission_density_matrix(
        pts, c.bare, driven_options(cfg, c.bare.kappa, cfg.number("drive.cross_check_phi_over_kappa"), false));
    double max_abs = 0.0, max_rel = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!osc.points[i].valid || !dm.points[i].valid) continue;
      const double d = std::abs(dm.points[i].T_c - osc.points[i].T_c);
      max_abs = std::max(max_abs, d);
      if (osc.points[i].T_c > 0) max_rel = std::max(max_rel, d / osc.points[i].T_c);
    }
    const std::string tag = "N" + std::to_string(n);
    w.spectrum("spectrum_oscillator_" + tag, osc);
    w.spectrum("spectrum_density_matrix_" + tag, dm);
    json row = {{"n_side", n},
                {"N", c.system.size()},
                {"effective", params_json(c.params)},
                {"adiabaticity", report_json(c.report)},
                {"peaks", peaks_json(peak_analysis(osc))},
                {"route_max_abs_difference", max_abs},
                {"route_max_rel_difference", max_rel}};
    if (dm.cutoff_change_T_c) row["cutoff_change_T_c"] = *dm.cutoff_change_T_c;
    rows.push_back(row);
  }
  res.summary["spectra"] = rows;

  std::vector<int> sides = int_list(cfg.at("scan.scaling_n_sides"));
  const std::vector<int> fit_sides = int_list(cfg.at("scan.scaling_fit_n_sides"));
  for (int n : fit_sides)
    if (std::find(sides.begin(), sides.end(), n) == sides.end()) sides.push_back(n);
  std::sort(sides.begin(), sides.end());
  std::vector<double> xs, ys, all_n, all_dg;
  for (int n : sides) {
    const auto L = cube_layout(cfg, n);
    const double dg = delta_g_direct(assemble(L, 0.0));
    all_n.push_back(static_cast<double>(L.size()));
    all_dg.push_back(dg);
    if (std::find(fit_sides.begin(), fit_sides.end(), n) != fit_sides.end()) {
      xs.push_back(all_n.back());
      ys.push_back(dg);
    }
  }
  const auto f = fit_line(xs, ys);
  auto os = w.open("scaling.csv");
  os << "n_side,N,delta_g,linear_fit,residual,in_fit\n";
  json residuals = json::array();
  for (std::size_t i = 0; i < sides.size(); ++i) {
    const double pred = f.intercept + f.slope * all_n[i];
    const bool in_fit = std::find(fit_sides.begin(), fit_sides.end(), sides[i]) != fit_sides.end();
    os << sides[i] << ',' << all_n[i] << ',' << fmt(all_dg[i]) << ',' << fmt(pred) << ',' << fmt(all_dg[i] - pred)
       << ',' << (in_fit ? 1 : 0) << '\n';
    residuals.push_back({{"n_side", sides[i]}, {"delta_g", all_dg[i]}, {"residual", all_dg[i] - pred}});
  }
  res.summary["scaling_fit"] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"points", residuals}};
}

void run_fig1_g2(const ExperimentConfig& cfg, const RunOptions& opt, Writer& w, RunResult& res, std::ostream& log) {
  json rows = json::array();
  for (int n : int_list(cfg.at("scan.n_sides"))) {
    log << "fig1_g2: N = " << n << "^3\n";
    auto c = analyze_cube(cfg, n);
    gate(c.report, c.params, "N_side=" + std::to_string(n), opt, res);
    const auto pts = laser_frame_points(*c.resolvent, c.bare, c.grid);
    const auto g2 = g2_sweep(pts, c.bare, driven_options(cfg, c.bare.kappa, cfg.number("drive.phi_over_kappa"), true));
    const auto pk = peak_analysis(transmission_oscillator(pts, c.bare));
    w.spectrum("g2_N" + std::to_string(n), g2);
    json row = {{"n_side", n}, {"N", c.system.size()}, {"effective", params_json(c.params)},
                {"adiabaticity", report_json(c.report)}, {"peaks", peaks_json(pk)}};
    if (const auto m = g2_minimum(g2)) {
      row["g2_min"] = m->g2;
      row["g2_min_omega_L"] = m->omega_L;
      if (pk.upper)
        row["g2_min_nearest_polariton"] =
            std::abs(m->omega_L - *pk.upper) <= std::abs(m->omega_L - *pk.lower) ? "upper" : "lower";
    }
    if (g2.cutoff_change_T_c) row["cutoff_change_T_c"] = *g2.cutoff_change_T_c;
    if (g2.cutoff_change_g2) row["cutoff_change_g2"] = *g2.cutoff_change_g2;
    rows.push_back(row);
  }
  res.summary["sweeps"] = rows;
}

void run_fig2_map(const ExperimentConfig& cfg, Writer& w, RunResult& res, std::ostream& log) {
  json rows = json::array();
  const auto& m = cfg.at("map");
  for (const auto& panel : cfg.at("panels")) {
    const auto name = panel.at("name").get<std::string>();
    log << "fig2_map: panel " << name << '\n';
    StrongCouplingMapConfig mc;
    mc.dipole = {panel.at("g0_A").get<double>(),  panel.at("g0_B").get<double>(),    panel.at("kappa").get<double>(),
                 panel.at("gamma_A").get<double>(), panel.at("gamma_B").get<double>(), panel.at("delta_B").get<double>(),
                 panel.at("delta_c").get<double>()};
    mc.target = vec3(panel.at("target"));
    mc.plane = panel.at("plane").get<std::string>() == "xz" ? DipolePlane::XZ : DipolePlane::YZ;
    mc.r_min = m.at("r_min").get<double>();
    mc.r_max = m.at("r_max").get<double>();
    mc.r_points = m.at("r_points").get<int>();
    mc.theta_min = kPi * m.at("theta_min_over_pi").get<double>();
    mc.theta_max = kPi * m.at("theta_max_over_pi").get<double>();
    mc.theta_points = m.at("theta_points").get<int>();
    const auto map = strong_coupling_map(mc);
    auto os = w.open("map_" + name + ".csv");
    write_strong_coupling_csv(os, map);
    std::size_t strong = 0, skipped = 0;
    const StrongCouplingCell* best = nullptr;
    double th_lo = 1e300, th_hi = -1e300;
    for (const auto& cell : map.cells) {
      if (cell.skipped) {
        ++skipped;
        continue;
      }
      if (!best || cell.ratio > best->ratio) best = &cell;
      if (cell.strong) {
        ++strong;
        th_lo = std::min(th_lo, cell.theta);
        th_hi = std::max(th_hi, cell.theta);
      }
    }
    json row = {{"panel", name}, {"strong_cells", strong}, {"skipped_cells", skipped}};
    if (best) row["max_ratio"] = {{"ratio", best->ratio}, {"r", best->r}, {"theta_over_pi", best->theta / kPi}};
    if (strong) row["strong_theta_over_pi"] = {th_lo / kPi, th_hi / kPi};
    rows.push_back(row);
  }
  res.summary["panels"] = rows;
}

void run_fig2_dynamics(const ExperimentConfig& cfg, const RunOptions& opt, Writer& w, RunResult& res,
                       std::ostream& log) {
  json rows = json::array();
  const auto& d = cfg.at("dynamics");
  for (const auto& panel : cfg.at("panels")) {
    const auto name = panel.at("name").get<std::string>();
    log << "fig2_dynamics: panel " << name << '\n';
    const double r = panel.at("marked_point").at("r").get<double>();
    const double th = kPi * panel.at("marked_point").at("theta_over_pi").get<double>();
    const EmitterLayout L = panel_layout(panel, r, th);
    const CouplingSystem sys = assemble(L, 0.0);
    const double kappa = panel.at("kappa").get<double>();
    auto eval = [&](double dc) { return effective_parameters(sys, bare_parameters(L, dc, kappa)); };
    double dc = panel.at("delta_c").get<double>();
    if (d.at("compensate_detuning").get<bool>()) dc = compensate_cavity_detuning(eval, dc, 1e-6);
    const BareParameters bare = bare_parameters(L, dc, kappa);
    const EffectiveParameters p = eval(dc);
    const auto rep = adiabaticity_report(sys, {kappa, L.gamma_A, p.g_A_eff});
    gate(rep, p, "panel " + name, opt, res);

    HilbertConfig h;
    h.n_photon_max = d.at("n_photon_max").get<int>();
    h.dimension_limit = static_cast<std::size_t>(d.at("dimension_limit").get<int>());
    const auto full = build_full_liouvillian(L, bare, std::nullopt, h);
    HilbertConfig he = h;
    he.n_two_level_systems = 1;
    const auto eff = build_effective_liouvillian(p, std::nullopt, he);
    EmitterLayout L0 = L;
    L0.ensemble.clear();
    L0.detunings.clear();
    const auto bare_model = build_full_liouvillian(L0, bare, std::nullopt, h);

    const double rate = std::abs(p.g_A_eff) > 1e-12 ? std::abs(p.g_A_eff) : std::max(kappa, L.gamma_A);
    const double T = d.at("rabi_periods").get<double>() * kPi / rate;
    const int samples = d.at("samples").get<int>();
    std::vector<double> t(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) t[i] = T * i / (samples - 1);

    const auto tf = evolve(full, DensityMatrix::fock(full.hilbert(), 1), t);
    const auto te = evolve(eff, DensityMatrix::fock(eff.hilbert(), 1), t);
    const auto tb = evolve(bare_model, DensityMatrix::fock(bare_model.hilbert(), 1), t);

    auto os = w.open("dynamics_" + name + ".csv");
    os << "t,n_full,P_A_full,P_B_full,n_eff,P_A_eff,n_bare,P_A_bare\n";
    double dev = 0.0, pb_max = 0.0, drift = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto& f = tf.observables[i];
      const auto& e = te.observables[i];
      const auto& b = tb.observables[i];
      os << fmt(t[i]) << ',' << fmt(f.photon_number) << ',' << fmt(f.population_A) << ','
         << fmt(f.population_B_total) << ',' << fmt(e.photon_number) << ',' << fmt(e.population_A) << ','
         << fmt(b.photon_number) << ',' << fmt(b.population_A) << '\n';
      dev = std::max({dev, std::abs(f.photon_number - e.photon_number), std::abs(f.population_A - e.population_A)});
      pb_max = std::max(pb_max, f.population_B_total);
      drift = std::max({drift, f.trace_error, e.trace_error});
    }
    for (const auto& [tag, tr] : {std::pair{"full", &tf}, std::pair{"effective", &te}, std::pair{"bare", &tb}}) {
      auto ts = w.open("trajectory_" + name + "_" + tag + ".csv");
      write_trajectory_csv(ts, *tr);
    }
    rows.push_back({{"panel", name},
                    {"r", r},
                    {"theta_over_pi", th / kPi},
                    {"delta_c", dc},
                    {"effective", params_json(p)},
                    {"adiabaticity", report_json(rep)},
                    {"time_span", T},
                    {"max_population_deviation", dev},
                    {"max_P_B_full", pb_max},
                    {"max_trace_error", drift}});
  }
  res.summary["panels"] = rows;
}

void run_fig3(const ExperimentConfig& cfg, const RunOptions& opt, Writer& w, RunResult& res, std::ostream& log) {
  auto os = w.open("siv_scan.csv");
  os << "n_side,N,g_A_eff,gamma_plus,strong,P_B\n";
  std::optional<std::size_t> crossing;
  json scan = json::array();
  for (int n : int_list(cfg.at("scan.n_sides"))) {
    const auto L = cube_layout(cfg, n);
    const auto sys = assemble(L, 0.0);
    const auto p = effective_parameters(sys, cube_bare(cfg, L));
    const auto g = gamma_pm(p);
    const double pb = one_photon_population(sys);
    const bool strong = strongly_coupled(p);
    if (strong && !crossing) crossing = L.size();
    os << n << ',' << L.size() << ',' << fmt(p.g_A_eff) << ',' << fmt(g.gamma_plus) << ',' << (strong ? 1 : 0) << ','
       << fmt(pb) << '\n';
    scan.push_back({{"N", L.size()}, {"g_A_eff", p.g_A_eff}, {"gamma_plus", g.gamma_plus}});
  }
  res.summary["scan"] = scan;
  res.summary["crossing_N"] = crossing ? json(*crossing) : json(nullptr);

  const int n = cfg.integer("ensemble.n_side");
  log << "fig3_siv: spectrum and g2 at N = " << n << "^3\n";
  auto c = analyze_cube(cfg, n);
  gate(c.report, c.params, "N_side=" + std::to_string(n), opt, res);
  const auto pts = laser_frame_points(*c.resolvent, c.bare, c.grid);
  const auto osc = transmission_oscillator(pts, c.bare);
  const auto g2 = g2_sweep(pts, c.bare, driven_options(cfg, c.bare.kappa, cfg.number("drive.phi_over_kappa"), true));
  w.spectrum("spectrum_oscillator", osc);
  w.spectrum("g2", g2);
  const auto pk = peak_analysis(osc);
  json j = {{"N", c.system.size()}, {"effective", params_json(c.params)}, {"adiabaticity", report_json(c.report)},
            {"strong", strongly_coupled(c.params)}, {"peaks", peaks_json(pk)}};
  if (const auto m = g2_minimum(g2)) {
    j["g2_min"] = m->g2;
    j["g2_min_omega_L"] = m->omega_L;
    if (pk.upper)
      j["g2_min_nearest_polariton"] =
          std::abs(m->omega_L - *pk.upper) <= std::abs(m->omega_L - *pk.lower) ? "upper" : "lower";
  }
  if (g2.cutoff_change_g2) j["cutoff_change_g2"] = *g2.cutoff_change_g2;
  res.summary["target_size"] = j;
}

json campaign_summary(const CampaignResult& r) {
  auto g = r.g_eff_values();
  auto pb = r.populations();
  json j = {{"failures", r.failures}, {"successes", g.size()}};
  if (g.empty()) return j;
  auto quant = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    return i + 1 < v.size() ? v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]) : v[i];
  };
  double mean = 0.0;
  for (double x : g) mean += x;
  mean /= static_cast<double>(g.size());
  double var = 0.0;
  for (double x : g) var += (x - mean) * (x - mean);
  j["g_A_eff_mean"] = mean;
  j["g_A_eff_std"] = g.size() > 1 ? std::sqrt(var / static_cast<double>(g.size() - 1)) : 0.0;
  j["g_A_eff_iqr"] = quant(g, 0.75) - quant(g, 0.25);
  j["P_B_median"] = quant(pb, 0.5);
  std::size_t fails = 0, fails_high = 0;
  for (const auto& rec : r.records)
    if (rec.ok && rec.grade && *rec.grade == AdiabaticityGrade::Fail) {
      ++fails;
      if (rec.P_B >= 0.1) ++fails_high;
    }
  j["grade_fail"] = fails;
  j["grade_fail_with_P_B_above_0.1"] = fails_high;
  if (!r.average_T_c.empty()) j["average_peaks"] = peaks_json(peak_analysis(r.grid, r.average_T_c));
  return j;
}

void run_disorder(const ExperimentConfig& cfg, const RunOptions& opt, Writer& w, RunResult& res, std::ostream& log) {
  const int n = cfg.integer("ensemble.n_side");
  auto c = analyze_cube(cfg, n);
  gate(c.report, c.params, "disorder-free ensemble", opt, res);
  const auto& d = cfg.at("disorder");
  const double spacing = cfg.number("ensemble.spacing");
  const double delta_B = cfg.number("physics.delta_B");
  json spectral = json::array(), positional = json::array();

  for (const auto& wj : d.at("spectral_strengths_over_delta_B")) {
    const double W = wj.get<double>();
    log << "sm_disorder: spectral W/Delta_B = " << W << '\n';
    Campaign camp;
    camp.base = c.layout;
    camp.disorder = {DisorderKind::Spectral, W * delta_B, spacing, cfg.seed(), d.at("realizations").get<int>()};
    camp.bare = c.bare;
    camp.grid = c.grid;
    camp.outputs = {true, d.at("per_realization_spectra").get<bool>(), true, d.at("mode_report").get<bool>(),
                    d.at("grade").get<bool>()};
    camp.histogram_bins = d.at("histogram_bins").get<int>();
    const auto r = run_campaign(camp);
    const std::string sub = "spectral_W" + fmt(W);
    write_campaign(w.dir / sub, camp, r);
    w.result->files.push_back(sub + "/");
    json j = campaign_summary(r);
    j["W_over_delta_B"] = W;
    spectral.push_back(j);
  }
  for (const auto& wj : d.at("positional_strengths_over_spacing")) {
    const double W = wj.get<double>();
    log << "sm_disorder: positional W/d = " << W << '\n';
    Campaign camp;
    camp.base = c.layout;
    camp.disorder = {DisorderKind::Positional, W, spacing, cfg.seed(), d.at("positional_realizations").get<int>()};
    camp.bare = c.bare;
    camp.grid = c.grid;
    camp.outputs = {false, false, true, false, false};
    camp.histogram_bins = d.at("histogram_bins").get<int>();
    const auto r = run_campaign(camp);
    const std::string sub = "positional_W" + fmt(W);
    write_campaign(w.dir / sub, camp, r);
    w.result->files.push_back(sub + "/");
    json j = campaign_summary(r);
    j["W_over_spacing"] = W;
    positional.push_back(j);
  }
  res.summary["spectral"] = spectral;
  res.summary["positional"] = positional;
}

void run_custom(const ExperimentConfig& cfg, const RunOptions& opt, Writer& w, RunResult& res, std::ostream& log) {
  const int n = cfg.integer("ensemble.n_side");
  log << "custom: N_side = " << n << '\n';
  auto c = analyze_cube(cfg, n);
  gate(c.report, c.params, "ensemble", opt, res);
  const auto pts = laser_frame_points(*c.resolvent, c.bare, c.grid);
  const auto osc = transmission_oscillator(pts, c.bare);
  const auto g2 = g2_sweep(pts, c.bare, driven_options(cfg, c.bare.kappa, cfg.number("drive.phi_over_kappa"), true));
  w.spectrum("spectrum_oscillator", osc);
  w.spectrum("g2", g2);
  json j = {{"N", c.system.size()}, {"effective", params_json(c.params)}, {"adiabaticity", report_json(c.report)},
            {"peaks", peaks_json(peak_analysis(osc))}};
  if (const auto m = g2_minimum(g2)) j["g2_min"] = {{"g2", m->g2}, {"omega_L", m->omega_L}};
  res.summary["result"] = j;
}

std::vector<int> cube_sizes_used(const ExperimentConfig& cfg) {
  std::vector<int> out{cfg.integer("ensemble.n_side")};
  if (cfg.tree.contains("scan"))
    for (auto it = cfg.tree["scan"].begin(); it != cfg.tree["scan"].end(); ++it)
      for (int n : int_list(it.value())) out.push_back(n);
  if (cfg.kind == ExperimentKind::Fig1Spectrum || cfg.kind == ExperimentKind::Fig1G2)
    out = int_list(cfg.at("scan.n_sides"));
  return out;
}

}  // namespace

EmitterLayout cube_layout(const ExperimentConfig& cfg, int n_side) {
  const auto& ph = cfg.at("physics");
  const auto& en = cfg.at("ensemble");
  EmitterLayout L;
  L.target = vec3(ph.at("target"));
  L.gamma_A = ph.at("gamma_A").get<double>();
  L.gamma_B = ph.at("gamma_B").get<double>();
  L.g0_A = ph.at("g0_A").get<double>();
  L.g0_B = ph.at("g0_B").get<double>();
  L.ensemble = build_centered_cube(n_side, en.at("spacing").get<double>(), vec3(en.at("center")));
  L.detunings.assign(L.ensemble.size(), ph.at("delta_B").get<double>());
  if (en.at("shape").get<std::string>() == "point") L = collapse_to_point_dipole(L);
  return L;
}

EmitterLayout panel_layout(const json& panel, double r, double theta) {
  EmitterLayout L;
  L.target = vec3(panel.at("target"));
  L.gamma_A = panel.at("gamma_A").get<double>();
  L.gamma_B = panel.at("gamma_B").get<double>();
  L.g0_A = panel.at("g0_A").get<double>();
  L.g0_B = panel.at("g0_B").get<double>();
  const Position3 dir = panel.at("plane").get<std::string>() == "xz"
                            ? Position3{std::sin(theta), 0.0, std::cos(theta)}
                            : Position3{0.0, std::sin(theta), std::cos(theta)};
  L.ensemble = {L.target + r * dir};
  L.detunings = {panel.at("delta_B").get<double>()};
  return L;
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  res.output_dir = cfg.output();
  if (!opt.overwrite && fs::exists(res.output_dir) && !fs::is_empty(res.output_dir))
    throw ConfigError("output: directory '" + res.output_dir.string() + "' is not empty");
  const auto gate_report = preflight(cfg, false);
  for (const auto& c : gate_report.checks)
    if (c.status == "fail") throw PhysicsValidityError(c.name + ": " + c.detail);
  fs::create_directories(res.output_dir);
  Writer w{res.output_dir, &res};

  switch (cfg.kind) {
    case ExperimentKind::Fig1Spectrum: run_fig1_spectrum(cfg, opt, w, res, log); break;
    case ExperimentKind::Fig1G2: run_fig1_g2(cfg, opt, w, res, log); break;
    case ExperimentKind::Fig2Map: run_fig2_map(cfg, w, res, log); break;
    case ExperimentKind::Fig2Dynamics: run_fig2_dynamics(cfg, opt, w, res, log); break;
    case ExperimentKind::Fig3SiV: run_fig3(cfg, opt, w, res, log); break;
    case ExperimentKind::SmDisorder: run_disorder(cfg, opt, w, res, log); break;
    case ExperimentKind::Custom: run_custom(cfg, opt, w, res, log); break;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  json manifest = {{"experiment", to_string(cfg.kind)},
                   {"version", kVersion},
                   {"seed", cfg.seed()},
                   {"wall_time_s", wall},
                   {"threads", threads},
                   {"forced", opt.force},
                   {"resolved_config", cfg.tree},
                   {"files", res.files},
                   {"warnings", res.warnings},
                   {"summary", res.summary}};
  std::ofstream(res.output_dir / "manifest.json") << manifest.dump(2) << '\n';
  return res;
}

bool PreflightReport::ok() const {
  return std::none_of(checks.begin(), checks.end(), [](const PreflightCheck& c) { return c.status == "fail"; });
}

json PreflightReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks) arr.push_back({{"check", c.name}, {"status", c.status}, {"detail", c.detail}});
  return {{"ok", ok()}, {"checks", arr}};
}

PreflightReport preflight(const ExperimentConfig& cfg, bool estimates) {
  PreflightReport rep;
  rep.checks.push_back({"schema", "pass", "schema version " + std::to_string(kConfigSchemaVersion)});
  auto add = [&](std::string name, std::string status, std::string detail) {
    rep.checks.push_back({std::move(name), std::move(status), std::move(detail)});
  };
  auto grade_status = [](AdiabaticityGrade g) {
    return g == AdiabaticityGrade::Pass ? "pass" : g == AdiabaticityGrade::Warn ? "warn" : "fail";
  };
  auto hilbert_check = [&](const std::string& name, HilbertConfig h) {
    try {
      h.validate();
      add(name, "pass", "dimension " + std::to_string(h.dimension()) + " <= " + std::to_string(h.dimension_limit));
    } catch (const Error& e) {
      add(name, "fail", e.what());
    }
  };

  if (cfg.tree.contains("panels")) {
    for (const auto& panel : cfg.at("panels")) {
      const auto name = panel.at("name").get<std::string>();
      const double r = panel.at("marked_point").at("r").get<double>();
      const double th = kPi * panel.at("marked_point").at("theta_over_pi").get<double>();
      const auto L = panel_layout(panel, r, th);
      try {
        L.validate();
        add("geometry/" + name, "pass", "separation " + fmt(r));
        if (!estimates) continue;
        const auto sys = assemble(L, 0.0);
        const double kappa = panel.at("kappa").get<double>();
        const auto p = effective_parameters(sys, bare_parameters(L, panel.at("delta_c").get<double>(), kappa));
        const auto a = adiabaticity_report(sys, {kappa, L.gamma_A, p.g_A_eff});
        add("adiabaticity/" + name, grade_status(a.grade),
            "min|lambda|/rate = " + fmt(a.ratio) + ", one-photon P_B = " + fmt(a.one_photon_population));
        const auto rates = gamma_pm(p);
        add("strong_coupling/" + name, strongly_coupled(p) ? "pass" : "warn",
            "|g_A_eff|/gamma_+ = " + fmt(std::abs(p.g_A_eff) / rates.gamma_plus));
      } catch (const Error& e) {
        add("geometry/" + name, "fail", e.what());
      }
    }
    if (cfg.tree.contains("map")) {
      const double rmin = cfg.number("map.r_min");
      add("geometry/map", rmin >= kMinSeparation ? "pass" : "warn",
          "r_min = " + fmt(rmin) + (rmin >= kMinSeparation ? "" : " (cells below the minimum separation are skipped)"));
    }
    if (cfg.tree.contains("dynamics")) {
      HilbertConfig h;
      h.n_photon_max = cfg.integer("dynamics.n_photon_max");
      h.n_two_level_systems = 2;
      h.dimension_limit = static_cast<std::size_t>(cfg.integer("dynamics.dimension_limit"));
      hilbert_check("hilbert/full_model", h);
    }
    return rep;
  }

  if (cfg.tree.contains("drive")) {
    HilbertConfig h = driven_hilbert(cfg);
    if (cfg.at("drive.check_cutoff").get<bool>()) h.n_photon_max += 1;
    hilbert_check("hilbert/effective_model", h);
  }
  const auto sizes = cube_sizes_used(cfg);
  const int largest = *std::max_element(sizes.begin(), sizes.end());
  try {
    const auto L = cube_layout(cfg, largest);
    L.validate();
    add("geometry", "pass", "N = " + std::to_string(L.size()) + ", min separation " + fmt(min_pair_separation(L)));
    if (!estimates) return rep;
    const auto sys = assemble(L, 0.0);
    const auto bare = cube_bare(cfg, L);
    const auto p = effective_parameters(sys, bare);
    const auto a = adiabaticity_report(sys, {bare.kappa, bare.gamma_A, p.g_A_eff});
    add("adiabaticity", grade_status(a.grade),
        "N = " + std::to_string(L.size()) + ": min|lambda|/rate = " + fmt(a.ratio) +
            ", one-photon P_B = " + fmt(a.one_photon_population));
    add("effective_rates", p.physically_valid() ? "pass" : "fail",
        "kappa_eff = " + fmt(p.kappa_eff) + ", gamma_A_eff = " + fmt(p.gamma_A_eff));
  } catch (const Error& e) {
    add("geometry", "fail", e.what());
  }
  return rep;
}

}  // namespace eqed
