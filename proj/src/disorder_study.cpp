#include "eqed/disorder_study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "eqed/error.hpp"
#include "eqed/random.hpp"
#include "eqed/resolvent.hpp"

namespace eqed {

SymmetricOverlap symmetric_overlap(const ModeSet& modes) {
  if (modes.flagged) throw NumericalFailure("symmetric overlap: mode set is flagged (" + modes.flag_reason + ")");
  SymmetricOverlap out;
  const Eigen::Index N = modes.eigenvectors.rows();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(N));
  double best = -1.0;
  for (Eigen::Index m = 0; m < modes.eigenvectors.cols(); ++m) {
    const auto x = modes.eigenvectors.col(m);
    const double amp = std::min(1.0, std::abs(x.sum()) * inv_sqrt_n / x.norm());
    out.amplitude.push_back(amp);
    out.squared.push_back(amp * amp);
    if (amp > best) {
      best = amp;
      out.argmax = static_cast<std::size_t>(m);
    }
  }
  return out;
}

ModeReport mode_report(const CouplingSystem& system, const ModeSet& modes) {
  const auto contrib = mode_contributions(system, modes);
  const auto ov = symmetric_overlap(modes);
  ModeReport rep;
  rep.completeness_residual = modes.completeness_residual;
  for (std::size_t m = 0; m < contrib.size(); ++m)
    rep.ranked.push_back({m, contrib[m].eigenvalue, contrib[m].delta_g, ov.amplitude[m], ov.squared[m]});
  std::stable_sort(rep.ranked.begin(), rep.ranked.end(),
                   [](const ModeEntry& a, const ModeEntry& b) { return std::abs(a.delta_g) > std::abs(b.delta_g); });
  return rep;
}

void Campaign::validate() const {
  base.validate();
  disorder.validate();
  if (outputs.avg_spectrum || outputs.per_realization_spectra) grid.validate();
  if (histogram_bins < 0) throw InvalidArgument("campaign: histogram_bins must be >= 0");
}

std::vector<double> CampaignResult::g_eff_values() const {
  std::vector<double> out;
  for (const auto& r : records)
    if (r.ok) out.push_back(r.g_A_eff);
  return out;
}

std::vector<double> CampaignResult::populations() const {
  std::vector<double> out;
  for (const auto& r : records)
    if (r.ok) out.push_back(r.P_B);
  return out;
}

Histogram make_histogram(const std::vector<double>& values, int bins) {
  if (values.empty()) throw InvalidArgument("histogram: no values");
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  const double lo = v.front(), hi = v.back();
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] * (1.0 - frac) + v[i + 1] * frac : v[i];
  };
  int n_bins = bins;
  if (n_bins == 0) {
    const double width = 2.0 * (quantile(0.75) - quantile(0.25)) / std::cbrt(static_cast<double>(v.size()));
    n_bins = (width > 0.0 && hi > lo) ? static_cast<int>(std::ceil((hi - lo) / width)) : 1;
    n_bins = std::clamp(n_bins, 1, 10000);
  }
  Histogram h;
  const double span = hi > lo ? hi - lo : 1.0;
  const double left = hi > lo ? lo : lo - 0.5;
  for (int b = 0; b <= n_bins; ++b) h.edges.push_back(left + span * b / n_bins);
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);
  for (double x : v) {
    auto b = static_cast<int>((x - left) / span * n_bins);
    h.counts[static_cast<std::size_t>(std::clamp(b, 0, n_bins - 1))]++;
  }
  return h;
}

std::vector<double> ordered_mean(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const std::size_t n = rows.front().size();
  std::vector<double> sum(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  for (const auto& r : rows) {
    if (r.size() != n) throw InvalidArgument("ordered_mean: ragged rows");
    for (std::size_t j = 0; j < n; ++j)
      if (std::isfinite(r[j])) {
        sum[j] += r[j];
        ++count[j];
      }
  }
  for (std::size_t j = 0; j < n; ++j)
    sum[j] = count[j] ? sum[j] / static_cast<double>(count[j]) : std::numeric_limits<double>::quiet_NaN();
  return sum;
}

namespace {

void run_one(const Campaign& c, RealizationRecord& rec) {
  DisorderSpec spec = c.disorder;
  spec.seed = rec.seed;
  const EmitterLayout layout = spec.kind == DisorderKind::Spectral ? apply_spectral_disorder(c.base, spec)
                                                                   : apply_positional_disorder(c.base, spec);
  const CouplingSystem sys = assemble(layout, 0.0);
  const bool spectra = c.outputs.avg_spectrum || c.outputs.per_realization_spectra;

  if (spectra || c.outputs.grade) {
    HessenbergResolvent hr(sys);
    const auto s0 = hr.at(0.0);
    const auto p = effective_parameters(s0, c.bare, 0.0);
    rec.g_A_eff = p.g_A_eff;
    rec.delta_g = p.g_A_eff - c.bare.g_A;
    rec.P_B = s0.norm_gg;
    if (c.outputs.grade) {
      const CVector ev = hr.eigenvalues();
      rec.min_abs_eigenvalue = ev.size() ? ev.cwiseAbs().minCoeff() : std::numeric_limits<double>::infinity();
      const double scale = std::max({c.bare.kappa, c.bare.gamma_A, std::abs(p.g_A_eff)});
      rec.grade = grade_adiabaticity(rec.min_abs_eigenvalue, scale, rec.P_B);
    }
    if (spectra) {
      const auto osc = transmission_oscillator(laser_frame_points(hr, c.bare, c.grid), c.bare);
      rec.T_c.reserve(osc.points.size());
      for (const auto& pt : osc.points)
        rec.T_c.push_back(pt.valid ? pt.T_c : std::numeric_limits<double>::quiet_NaN());
      rec.half_splitting = peak_analysis(osc).half_splitting;
    }
  } else {
    const auto p = effective_parameters(sys, c.bare);
    rec.g_A_eff = p.g_A_eff;
    rec.delta_g = p.g_A_eff - c.bare.g_A;
    rec.P_B = one_photon_population(sys);
  }
  if (c.outputs.mode_report) {
    const ModeSet modes = eigenmodes(sys);
    if (!modes.flagged) rec.modes = mode_report(sys, modes);
  }
  rec.ok = true;
}

}  // namespace

CampaignResult run_campaign(const Campaign& c) {
  c.validate();
  const auto n = static_cast<std::size_t>(c.disorder.realizations);
  CampaignResult res;
  res.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.records[i].index = i;
    res.records[i].seed = derive_seed(c.disorder.seed, i);
  }

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    auto& rec = res.records[static_cast<std::size_t>(ii)];
    try {
      run_one(c, rec);
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
  }

  std::vector<std::vector<double>> rows;
  for (const auto& r : res.records) {
    if (!r.ok) {
      ++res.failures;
      continue;
    }
    res.order_by_population.push_back(r.index);
    if (!r.T_c.empty()) rows.push_back(r.T_c);
  }
  if (2 * res.failures > n) {
    std::ostringstream os;
    os << "campaign: " << res.failures << " of " << n << " realizations failed";
    if (!res.records.empty()) {
      for (const auto& r : res.records)
        if (!r.ok) {
          os << " (first error: " << r.error << ")";
          break;
        }
    }
    throw NumericalFailure(os.str());
  }
  std::stable_sort(res.order_by_population.begin(), res.order_by_population.end(),
                   [&](std::size_t a, std::size_t b) { return res.records[a].P_B < res.records[b].P_B; });
  if (c.outputs.avg_spectrum || c.outputs.per_realization_spectra) res.grid = c.grid.omega_L;
  if (c.outputs.avg_spectrum) res.average_T_c = ordered_mean(rows);
  if (c.outputs.geff_histogram) res.histogram = make_histogram(res.g_eff_values(), c.histogram_bins);
  if (!c.outputs.per_realization_spectra && !c.outputs.avg_spectrum)
    for (auto& r : res.records) r.T_c.clear();
  return res;
}

SmallWReport small_W_consistency(const std::vector<CampaignResult>& campaigns, const std::vector<double>& strengths,
                                 double delta_g_zero, cplx lambda_S) {
  if (campaigns.size() != strengths.size() || campaigns.empty())
    throw InvalidArgument("small-W consistency: need one strength per campaign");
  SmallWReport rep;
  rep.delta_g_zero = delta_g_zero;
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < campaigns.size(); ++k) {
    double sum = 0.0;
    std::size_t ok = 0;
    for (const auto& r : campaigns[k].records)
      if (r.ok) {
        sum += r.delta_g;
        ++ok;
      }
    if (ok == 0) throw InvalidArgument("small-W consistency: campaign without successful realizations");
    const double mean = sum / static_cast<double>(ok);
    const double W = strengths[k];
    if (ok < 20) {
      std::ostringstream os;
      os << "W=" << W << ": only " << ok << " realizations (fewer than 20); low statistical power";
      rep.warnings.push_back(os.str());
    }
    if (W / std::abs(lambda_S) > 0.3) {
      std::ostringstream os;
      os << "W=" << W << ": W/|lambda_S| = " << W / std::abs(lambda_S) << " exceeds 0.3";
      rep.warnings.push_back(os.str());
    }
    rep.mean_delta_g = mean;
    rep.relative_deviation = delta_g_zero != 0.0 ? std::abs(mean - delta_g_zero) / std::abs(delta_g_zero) : 0.0;
    num += W * W * (mean - delta_g_zero);
    den += W * W * W * W;
  }
  if (campaigns.size() > 1 && den > 0.0) rep.quadratic_coefficient = num / den;
  return rep;
}

SmallWReport small_W_consistency(const CampaignResult& campaign, double strength, double delta_g_zero,
                                 cplx lambda_S) {
  return small_W_consistency(std::vector<CampaignResult>{campaign}, {strength}, delta_g_zero, lambda_S);
}

void write_campaign(const std::filesystem::path& dir, const Campaign& c, const CampaignResult& r) {
  std::filesystem::create_directories(dir);
  nlohmann::json m;
  m["seed"] = c.disorder.seed;
  m["disorder"] = {{"kind", c.disorder.kind == DisorderKind::Spectral ? "spectral" : "positional"},
                   {"strength", c.disorder.strength},
                   {"spacing", c.disorder.spacing},
                   {"realizations", c.disorder.realizations}};
  m["seed_scheme"] = "philox4x32-10: realization i uses block({i_lo, i_hi, 0x5eed, 0}, key(seed))";
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& rec : r.records) seeds.push_back(rec.seed);
  m["realization_seeds"] = seeds;
  m["failures"] = r.failures;
  m["grid_points"] = r.grid.size();
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';

  {
    std::ofstream os(dir / "realizations.csv");
    os << "index,seed,ok,g_A_eff,delta_g,P_B,grade,min_abs_eigenvalue,half_splitting,error\n" << std::setprecision(12);
    for (const auto& rec : r.records) {
      os << rec.index << ',' << rec.seed << ',' << (rec.ok ? 1 : 0) << ',' << rec.g_A_eff << ',' << rec.delta_g << ','
         << rec.P_B << ',' << (rec.grade ? to_string(*rec.grade) : "") << ',' << rec.min_abs_eigenvalue << ',';
      if (rec.half_splitting) os << *rec.half_splitting;
      std::string err = rec.error;
      std::replace(err.begin(), err.end(), ',', ';');
      os << ',' << err << '\n';
    }
  }
  if (!r.average_T_c.empty()) {
    std::ofstream os(dir / "average.csv");
    os << "omega_L,T_c_avg\n" << std::setprecision(12);
    for (std::size_t i = 0; i < r.grid.size(); ++i) os << r.grid[i] << ',' << r.average_T_c[i] << '\n';
  }
  if (r.histogram) {
    std::ofstream os(dir / "histogram.csv");
    os << "bin_left,bin_right,count\n" << std::setprecision(12);
    for (std::size_t b = 0; b < r.histogram->counts.size(); ++b)
      os << r.histogram->edges[b] << ',' << r.histogram->edges[b + 1] << ',' << r.histogram->counts[b] << '\n';
  }
  if (c.outputs.per_realization_spectra) {
    for (const auto& rec : r.records) {
      if (!rec.ok || rec.T_c.empty()) continue;
      std::ofstream os(dir / ("realization_" + std::to_string(rec.index) + ".csv"));
      os << "omega_L,T_c\n" << std::setprecision(12);
      for (std::size_t i = 0; i < r.grid.size(); ++i) os << r.grid[i] << ',' << rec.T_c[i] << '\n';
    }
  }
}

}  // namespace eqed
