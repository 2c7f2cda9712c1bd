#include "eqed/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <Eigen/LU>

#include "json.hpp"

#include "eqed/error.hpp"

namespace eqed {

namespace {

// FNV-1a over the raw bytes of the inputs; only used to tag outputs.
struct Digest {
  std::uint64_t h = 1469598103934665603ULL;
  void add(double x) {
    unsigned char b[sizeof x];
    std::memcpy(b, &x, sizeof x);
    for (unsigned char c : b) h = (h ^ c) * 1099511628211ULL;
  }
  std::string hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
  }
};

std::string digest_of(const std::vector<LaserFramePoint>& pts, const BareParameters& bare, double phi) {
  Digest d;
  for (double x : {bare.delta_c, bare.g_A, bare.kappa, bare.gamma_A, phi}) d.add(x);
  for (const auto& p : pts) d.add(p.omega_L);
  return d.hex();
}

double relative_change(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

}  // namespace

SweepGrid SweepGrid::uniform(double lo, double hi, int points, bool relative_to_cavity) {
  if (points < 1) throw InvalidArgument("sweep grid: need at least one point");
  if (points > 1 && !(hi > lo)) throw InvalidArgument("sweep grid: upper bound must exceed lower bound");
  SweepGrid g;
  g.relative_to_cavity = relative_to_cavity;
  g.omega_L.resize(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g.omega_L[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
  return g;
}

void SweepGrid::validate() const {
  if (omega_L.empty()) throw InvalidArgument("sweep grid: empty");
  for (std::size_t i = 0; i < omega_L.size(); ++i) {
    if (!std::isfinite(omega_L[i])) throw InvalidArgument("sweep grid: non-finite frequency");
    if (i > 0 && !(omega_L[i] > omega_L[i - 1])) throw InvalidArgument("sweep grid: not strictly increasing");
  }
}

SweepGrid default_grid(const EffectiveParameters& p, double kappa, int points, double span_factor) {
  const double half = span_factor * std::max(std::abs(p.g_A_eff), kappa);
  const double center = p.delta_c_eff + p.frame_detuning;
  return SweepGrid::uniform(center - half, center + half, points);
}

std::vector<double> SpectrumResult::omega() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.omega_L);
  return out;
}

std::vector<double> SpectrumResult::transmission() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.T_c);
  return out;
}

std::vector<LaserFramePoint> laser_frame_points(const Resolvent& resolvent, const BareParameters& bare,
                                                const SweepGrid& grid) {
  grid.validate();
  std::vector<LaserFramePoint> out(grid.omega_L.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double delta = grid.laser_detuning(i, bare.delta_c);
    auto& pt = out[i];
    pt.omega_L = grid.omega_L[i];
    pt.sample = resolvent.at(delta);
    if (pt.sample.valid) pt.params = effective_parameters(pt.sample, bare, delta);
  }
  return out;
}

SpectrumResult transmission_oscillator(const std::vector<LaserFramePoint>& points, const BareParameters& bare,
                                       double phi) {
  if (!(phi > 0.0)) throw InvalidArgument("oscillator transmission: phi must be positive");
  SpectrumResult res;
  res.method = "oscillator-reduced";
  res.phi = phi;
  res.parameters_digest = digest_of(points, bare, phi);
  res.points.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& in = points[i];
    auto& out = res.points[i];
    out.omega_L = in.omega_L;
    if (!in.sample.valid) {
      out.valid = false;
      continue;
    }
    const auto& p = in.params;
    const cplx I(0.0, 1.0);
    const cplx a11 = p.delta_c_eff - I * p.kappa_eff;
    const cplx a12 = p.g_A_eff - I * p.mu;
    const cplx a22 = p.delta_A_eff - I * p.gamma_A_eff;
    const cplx det = a11 * a22 - a12 * a12;
    const double scale = std::max({std::abs(a11 * a22), std::abs(a12 * a12), 1e-300});
    if (std::abs(det) < 1e-14 * scale) {
      out.valid = false;
      continue;
    }
    // (alpha, beta)^T = -A^{-1} (phi, 0)^T
    out.alpha = -phi * a22 / det;
    out.beta_A = phi * a12 / det;
    out.T_c = std::pow(bare.kappa / phi, 2) * std::norm(out.alpha);
    out.P_B = in.sample.norm_gg * std::norm(out.alpha) + in.sample.norm_vv * std::norm(out.beta_A) +
              2.0 * (std::conj(out.alpha) * out.beta_A * in.sample.cross_gv).real();
  }
  return res;
}

SpectrumResult transmission_oscillator(const CouplingSystem& system, const BareParameters& bare,
                                       const SweepGrid& grid, ResolventMethod method, OscillatorRoute route,
                                       double phi) {
  grid.validate();
  if (route == OscillatorRoute::Reduced) {
    std::unique_ptr<Resolvent> r;
    if (method == ResolventMethod::Modal && system.size() > 0) {
      const ModeSet modes = eigenmodes(system);
      r = make_resolvent(system, method, &modes);
    } else {
      r = make_resolvent(system, method);
    }
    auto res = transmission_oscillator(laser_frame_points(*r, bare, grid), bare, phi);
    res.method = std::string("oscillator-reduced/") + to_string(r->method());
    return res;
  }

  if (!(phi > 0.0)) throw InvalidArgument("oscillator transmission: phi must be positive");
  const Eigen::Index N = static_cast<Eigen::Index>(system.size());
  const cplx I(0.0, 1.0);
  SpectrumResult res;
  res.method = "oscillator-full";
  res.phi = phi;
  res.points.resize(grid.omega_L.size());
  std::vector<LaserFramePoint> tags(grid.omega_L.size());
  for (std::size_t i = 0; i < tags.size(); ++i) tags[i].omega_L = grid.omega_L[i];
  res.parameters_digest = digest_of(tags, bare, phi);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(grid.omega_L.size()); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double delta = grid.laser_detuning(i, bare.delta_c) - system.frame_detuning;
    const double frame = grid.laser_detuning(i, bare.delta_c);
    CMatrix A = CMatrix::Zero(N + 2, N + 2);
    A(0, 0) = bare.delta_c - frame - I * bare.kappa;
    A(0, 1) = A(1, 0) = bare.g_A;
    A(1, 1) = -frame - I * bare.gamma_A;
    if (N > 0) {
      A.block(0, 2, 1, N) = system.g.cast<cplx>().transpose();
      A.block(2, 0, N, 1) = system.g.cast<cplx>();
      A.block(1, 2, 1, N) = system.v.transpose();
      A.block(2, 1, N, 1) = system.v;
      A.block(2, 2, N, N) = system.M;
      A.block(2, 2, N, N).diagonal().array() -= delta;
    }
    CVector rhs = CVector::Zero(N + 2);
    rhs(0) = -phi;
    Eigen::PartialPivLU<CMatrix> lu(A);
    auto& out = res.points[i];
    out.omega_L = grid.omega_L[i];
    if (!(lu.rcond() > 1e-14)) {
      out.valid = false;
      continue;
    }
    const CVector x = lu.solve(rhs);
    out.alpha = x(0);
    out.beta_A = x(1);
    out.T_c = std::pow(bare.kappa / phi, 2) * std::norm(out.alpha);
    out.P_B = N > 0 ? x.tail(N).squaredNorm() : 0.0;
  }
  return res;
}

namespace {

struct DrivenValues {
  double T_c = 0.0;
  std::optional<double> g2;
  double P_B = 0.0;
};

DrivenValues driven_point(const LaserFramePoint& pt, const BareParameters& bare, double phi,
                          const HilbertConfig& hilbert) {
  const auto L = build_effective_liouvillian(pt.params, phi, hilbert);
  const auto rho = steady_state(L);
  const auto o = observables(rho);
  DrivenValues v;
  v.T_c = std::pow(bare.kappa / phi, 2) * o.photon_number;
  v.g2 = o.g2_zero;
  v.P_B = pt.sample.norm_gg * o.photon_number + pt.sample.norm_vv * o.population_A +
          2.0 * (o.coherence * pt.sample.cross_gv).real();
  return v;
}

}  // namespace

SpectrumResult transmission_density_matrix(const std::vector<LaserFramePoint>& points, const BareParameters& bare,
                                           const DrivenOptions& options) {
  const double phi = options.phi > 0.0 ? options.phi : 0.1 * bare.kappa;
  if (!(phi > 0.0)) throw InvalidArgument("density-matrix transmission: phi must be positive");
  HilbertConfig h = options.hilbert;
  h.n_two_level_systems = 1;
  h.validate();
  HilbertConfig h_up = h;
  h_up.n_photon_max += 1;

  SpectrumResult res;
  res.method = options.compute_g2 ? "density-matrix-g2" : "density-matrix";
  res.phi = phi;
  res.parameters_digest = digest_of(points, bare, phi);
  res.points.resize(points.size());
  std::vector<double> dT(points.size(), 0.0), dg(points.size(), 0.0);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(points.size()); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto& out = res.points[i];
    out.omega_L = points[i].omega_L;
    if (!points[i].sample.valid) {
      out.valid = false;
      continue;
    }
    try {
      const auto v = driven_point(points[i], bare, phi, h);
      out.T_c = v.T_c;
      out.P_B = v.P_B;
      if (options.compute_g2) out.g2 = v.g2;
      if (options.check_cutoff) {
        const auto w = driven_point(points[i], bare, phi, h_up);
        dT[i] = relative_change(v.T_c, w.T_c);
        if (options.compute_g2 && v.g2 && w.g2) dg[i] = relative_change(*v.g2, *w.g2);
      }
    } catch (const Error&) {
      out.valid = false;
    }
  }
  if (options.check_cutoff) {
    res.cutoff_change_T_c = *std::max_element(dT.begin(), dT.end());
    if (options.compute_g2) res.cutoff_change_g2 = *std::max_element(dg.begin(), dg.end());
  }
  return res;
}

SpectrumResult g2_sweep(const std::vector<LaserFramePoint>& points, const BareParameters& bare,
                        DrivenOptions options) {
  options.compute_g2 = true;
  return transmission_density_matrix(points, bare, options);
}

std::optional<G2Minimum> g2_minimum(const SpectrumResult& result) {
  std::optional<G2Minimum> best;
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const auto& p = result.points[i];
    if (!p.valid || !p.g2) continue;
    if (!best || *p.g2 < best->g2) best = G2Minimum{p.omega_L, *p.g2, i};
  }
  return best;
}

PeakReport peak_analysis(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("peak analysis: length mismatch");
  PeakReport rep;
  const std::size_t n = x.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    // parabola through the three samples (uniform or not)
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
    const double c = (d12 - d01) / (x2 - x0);
    Peak pk{x1, y1, i};
    if (c < 0.0) {
      const double b = d01 - c * (x0 + x1);
      const double xv = -b / (2.0 * c);
      if (xv >= x0 && xv <= x2) {
        pk.position = xv;
        pk.height = y1 + (xv - x1) * (d01 + c * (xv - x0));
      }
    }
    rep.peaks.push_back(pk);
  }
  if (rep.peaks.size() >= 2) {
    std::vector<Peak> byh = rep.peaks;
    std::sort(byh.begin(), byh.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
    const Peak& lo = byh[0].position < byh[1].position ? byh[0] : byh[1];
    const Peak& hi = byh[0].position < byh[1].position ? byh[1] : byh[0];
    rep.lower = lo.position;
    rep.upper = hi.position;
    rep.half_splitting = 0.5 * (hi.position - lo.position);
    rep.asymmetry = hi.height / lo.height;
  }
  return rep;
}

PeakReport peak_analysis(const SpectrumResult& s) {
  std::vector<double> x, y;
  for (const auto& p : s.points) {
    if (!p.valid) continue;
    x.push_back(p.omega_L);
    y.push_back(p.T_c);
  }
  return peak_analysis(x, y);
}

void write_spectrum_csv(std::ostream& os, const SpectrumResult& r) {
  os << "omega_L,T_c,g2,P_B,valid\n" << std::setprecision(12);
  for (const auto& p : r.points) {
    os << p.omega_L << ',' << p.T_c << ',';
    if (p.g2) os << *p.g2;
    os << ',' << p.P_B << ',' << (p.valid ? 1 : 0) << '\n';
  }
}

std::string spectrum_sidecar_json(const SpectrumResult& r) {
  nlohmann::json j;
  j["method"] = r.method;
  j["parameters_digest"] = r.parameters_digest;
  j["seed"] = r.seed;
  j["phi"] = r.phi;
  j["points"] = r.points.size();
  if (r.cutoff_change_T_c) j["cutoff_change_T_c"] = *r.cutoff_change_T_c;
  if (r.cutoff_change_g2) j["cutoff_change_g2"] = *r.cutoff_change_g2;
  if (const auto m = g2_minimum(r)) j["g2_min"] = {{"omega_L", m->omega_L}, {"g2", m->g2}};
  const auto peaks = peak_analysis(r);
  if (peaks.half_splitting) {
    j["half_splitting"] = *peaks.half_splitting;
    j["asymmetry"] = *peaks.asymmetry;
  }
  return j.dump(2);
}

}  // namespace eqed
