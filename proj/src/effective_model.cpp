#include "eqed/effective_model.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "eqed/dipole_kernel.hpp"
#include "eqed/error.hpp"

namespace eqed {

BareParameters bare_parameters(const EmitterLayout& layout, double delta_c, double kappa) {
  return {delta_c, cavity_coupling(layout.target, layout.g0_A, layout.wavenumber), kappa, layout.gamma_A};
}

std::vector<std::string> EffectiveParameters::warnings() const {
  std::vector<std::string> out;
  if (kappa_eff < 0.0) out.push_back("negative effective cavity decay (adiabatic elimination invalid)");
  if (gamma_A_eff < 0.0) out.push_back("negative effective target linewidth (adiabatic elimination invalid)");
  return out;
}

EffectiveParameters effective_parameters(const ResolventSample& s, const BareParameters& bare, double frame_detuning) {
  if (!s.valid) throw NumericalFailure("effective parameters: singular coupling matrix at this frequency");
  EffectiveParameters p;
  p.frame_detuning = frame_detuning;
  p.delta_c_eff = bare.delta_c - frame_detuning - s.gg.real();
  p.delta_A_eff = -frame_detuning - s.vv.real();
  p.g_A_eff = bare.g_A - s.gv.real();
  p.kappa_eff = bare.kappa + s.gg.imag();
  p.gamma_A_eff = bare.gamma_A + s.vv.imag();
  p.mu = s.gv.imag();
  return p;
}

EffectiveParameters effective_parameters(const CouplingSystem& system, const BareParameters& bare) {
  if (system.size() == 0) {
    EffectiveParameters p;
    p.frame_detuning = system.frame_detuning;
    p.delta_c_eff = bare.delta_c - system.frame_detuning;
    p.delta_A_eff = -system.frame_detuning;
    p.g_A_eff = bare.g_A;
    p.kappa_eff = bare.kappa;
    p.gamma_A_eff = bare.gamma_A;
    return p;
  }
  Eigen::PartialPivLU<CMatrix> lu(system.M);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    std::ostringstream os;
    os << "effective parameters: coupling matrix singular (reciprocal condition " << rc << ")";
    throw NumericalFailure(os.str());
  }
  CMatrix rhs(system.size(), 2);
  rhs.col(0) = system.g.cast<cplx>();
  rhs.col(1) = system.v;
  const CMatrix y = lu.solve(rhs);
  ResolventSample s;
  s.gg = (rhs.col(0).transpose() * y.col(0)).value();
  s.gv = (rhs.col(0).transpose() * y.col(1)).value();
  s.vv = (rhs.col(1).transpose() * y.col(1)).value();
  return effective_parameters(s, bare, system.frame_detuning);
}

EffectiveParameters point_dipole_parameters(const Position3& separation, double y_A, double y_B,
                                            const PointDipoleInputs& in) {
  const double denom = in.delta_B * in.delta_B + in.gamma_B * in.gamma_B;
  if (!(denom > 0.0)) throw InvalidArgument("point dipole: Delta_B^2 + gamma_B^2 = 0 (undamped resonant dipole)");
  const double lhs = in.g0_B * std::sqrt(in.gamma_A * in.gamma_B);
  const double rhs = in.g0_A * in.gamma_B;
  if (std::abs(lhs - rhs) > 1e-9 * std::max({std::abs(lhs), std::abs(rhs), 1e-300})) {
    std::ostringstream os;
    os << "point dipole: closed form needs g0_B sqrt(gamma_A gamma_B) = g0_A gamma_B (got " << lhs << " vs " << rhs
       << ")";
    throw InvalidArgument(os.str());
  }

  const auto gf = normalized_g_f(separation, in.gamma_A, in.gamma_B, in.wavenumber);
  const double g = gf.g, f = gf.f;
  const double k = in.wavenumber;
  const double db = in.delta_B, gb = in.gamma_B;
  const double gB = in.g0_B * std::cos(k * y_B);

  EffectiveParameters p;
  p.g_A_eff = in.g0_A * (std::cos(k * y_A) - (gb * db * g + gb * gb * f) / denom * std::cos(k * y_B));
  p.gamma_A_eff = in.gamma_A * (1.0 - f * f + std::pow(g * gb - f * db, 2) / denom);
  p.kappa_eff = in.kappa + gb * gB * gB / denom;
  p.mu = gB * std::sqrt(in.gamma_A * gb) * (g * gb - f * db) / denom;
  p.delta_c_eff = in.delta_c - gB * gB * db / denom;
  p.delta_A_eff = -in.gamma_A * gb * ((g * g - f * f) * db + 2.0 * g * f * gb) / denom;
  return p;
}

DecayRates gamma_pm(const EffectiveParameters& p) {
  const double mean = 0.5 * (p.kappa_eff + p.gamma_A_eff);
  const double half_diff = 0.5 * (p.kappa_eff - p.gamma_A_eff);
  const double root = std::sqrt(half_diff * half_diff + p.mu * p.mu);
  return {mean + root, mean - root};
}

bool strongly_coupled(const EffectiveParameters& p) { return std::abs(p.g_A_eff) > gamma_pm(p).gamma_plus; }

double compensate_cavity_detuning(const std::function<EffectiveParameters(double)>& evaluate, double initial_delta_c,
                                  double tolerance, int max_iterations) {
  auto mismatch = [&](double dc) {
    const auto p = evaluate(dc);
    return p.delta_c_eff - p.delta_A_eff;
  };
  double x0 = initial_delta_c;
  double f0 = mismatch(x0);
  if (std::abs(f0) <= tolerance) return x0;
  // start the secant with the step a unit-slope model would take
  double x1 = x0 - f0;
  double f1 = mismatch(x1);
  for (int it = 0; it < max_iterations; ++it) {
    if (std::abs(f1) <= tolerance) return x1;
    const double slope = (f1 - f0) / (x1 - x0);
    if (slope == 0.0 || !std::isfinite(slope)) break;
    const double x2 = x1 - f1 / slope;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = mismatch(x1);
  }
  if (std::abs(f1) <= tolerance) return x1;
  std::ostringstream os;
  os << "detuning compensation did not converge (residual " << f1 << ")";
  throw NumericalFailure(os.str());
}

StrongCouplingMap strong_coupling_map(const StrongCouplingMapConfig& cfg) {
  if (cfg.r_points < 1 || cfg.theta_points < 1) throw InvalidArgument("strong coupling map: empty grid");
  if (!(cfg.r_min > 0.0) || cfg.r_max < cfg.r_min) throw InvalidArgument("strong coupling map: bad r range");
  StrongCouplingMap map;
  map.r_points = cfg.r_points;
  map.theta_points = cfg.theta_points;
  map.cells.resize(static_cast<std::size_t>(cfg.r_points) * cfg.theta_points);

  auto lin = [](double lo, double hi, int n, int i) { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); };

#pragma omp parallel for schedule(static)
  for (int ir = 0; ir < cfg.r_points; ++ir) {
    const double r = lin(cfg.r_min, cfg.r_max, cfg.r_points, ir);
    for (int it = 0; it < cfg.theta_points; ++it) {
      const double th = lin(cfg.theta_min, cfg.theta_max, cfg.theta_points, it);
      const Position3 sep = cfg.plane == DipolePlane::XZ ? Position3{r * std::sin(th), 0.0, r * std::cos(th)}
                                                         : Position3{0.0, r * std::sin(th), r * std::cos(th)};
      auto& cell = map.cells[static_cast<std::size_t>(ir * cfg.theta_points + it)];
      cell.r = r;
      cell.theta = th;
      if (sep.norm() < kMinSeparation) {
        cell.skipped = true;
        continue;
      }
      const auto p = point_dipole_parameters(sep, cfg.target.y, cfg.target.y + sep.y, cfg.dipole);
      const auto rates = gamma_pm(p);
      cell.g_A_eff = p.g_A_eff;
      cell.gamma_plus = rates.gamma_plus;
      cell.ratio = std::abs(p.g_A_eff / rates.gamma_plus);
      cell.strong = cell.ratio > 1.0;
    }
  }
  return map;
}

void write_strong_coupling_csv(std::ostream& os, const StrongCouplingMap& map) {
  os << "r,theta,g_A_eff,gamma_plus,ratio,strong\n" << std::setprecision(12);
  for (const auto& c : map.cells) {
    if (c.skipped) continue;
    os << c.r << ',' << c.theta << ',' << c.g_A_eff << ',' << c.gamma_plus << ',' << c.ratio << ','
       << (c.strong ? 1 : 0) << '\n';
  }
}

}  // namespace eqed
