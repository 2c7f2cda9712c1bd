#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eqed/effective_model.hpp"
#include "eqed/liouville.hpp"
#include "eqed/resolvent.hpp"

namespace eqed {

/// Laser frequencies. Values are omega_L - omega_A unless `relative_to_cavity`
/// is set, in which case they are omega_L - omega_c.
struct SweepGrid {
  std::vector<double> omega_L;
  bool relative_to_cavity = false;

  static SweepGrid uniform(double lo, double hi, int points, bool relative_to_cavity = false);
  /// Strictly increasing and nonempty, else InvalidArgument.
  void validate() const;
  /// omega_L - omega_A of point i given the bare cavity detuning omega_c - omega_A.
  double laser_detuning(std::size_t i, double delta_c) const {
    return relative_to_cavity ? omega_L[i] + delta_c : omega_L[i];
  }
};

/// `points` points spanning +-span_factor max(|g_A_eff|, kappa) around delta_c_eff,
/// measured from omega_A.
SweepGrid default_grid(const EffectiveParameters& params, double kappa, int points = 401, double span_factor = 3.0);

struct SpectrumPoint {
  double omega_L = 0.0;
  double T_c = 0.0;
  std::optional<double> g2;
  double P_B = 0.0;
  cplx alpha;   // cavity amplitude (oscillator route)
  cplx beta_A;  // target amplitude (oscillator route)
  bool valid = true;
};

struct SpectrumResult {
  std::vector<SpectrumPoint> points;
  std::string method;
  std::string parameters_digest;
  std::uint64_t seed = 0;
  double phi = 0.0;
  /// Largest relative change of T_c and g2 when the Fock cutoff is raised by
  /// one (density-matrix routes with the check enabled).
  std::optional<double> cutoff_change_T_c;
  std::optional<double> cutoff_change_g2;

  std::vector<double> omega() const;
  std::vector<double> transmission() const;
};

/// Laser-frame effective parameters and resolvent norms at one frequency.
struct LaserFramePoint {
  double omega_L = 0.0;
  EffectiveParameters params;
  ResolventSample sample;
};

/// Evaluates the resolvent at each laser detuning of the grid. Points where
/// the resolvent is singular come back with sample.valid = false.
std::vector<LaserFramePoint> laser_frame_points(const Resolvent& resolvent, const BareParameters& bare,
                                                const SweepGrid& grid);

enum class OscillatorRoute {
  Reduced,  // 2x2 system in the effective parameters
  Full,     // (N+2)-dimensional amplitude system, validation only
};

/// Coupled-oscillator transmission (kappa/phi)^2 |alpha|^2. T_c does not
/// depend on phi; phi only scales the reported amplitudes.
SpectrumResult transmission_oscillator(const std::vector<LaserFramePoint>& points, const BareParameters& bare,
                                       double phi = 1.0);
SpectrumResult transmission_oscillator(const CouplingSystem& system, const BareParameters& bare,
                                       const SweepGrid& grid, ResolventMethod method = ResolventMethod::Modal,
                                       OscillatorRoute route = OscillatorRoute::Reduced, double phi = 1.0);

struct DrivenOptions {
  double phi = 0.0;  // 0 selects 0.1 kappa
  HilbertConfig hilbert{};
  bool compute_g2 = false;
  /// Recompute at n_photon_max + 1 and record the largest relative change.
  bool check_cutoff = false;
};

/// Driven steady state of the effective model at each point; T_c uses the
/// bare kappa. Singular or failed points are marked invalid.
SpectrumResult transmission_density_matrix(const std::vector<LaserFramePoint>& points, const BareParameters& bare,
                                           const DrivenOptions& options);

struct G2Minimum {
  double omega_L = 0.0;
  double g2 = 0.0;
  std::size_t index = 0;
};

/// transmission_density_matrix with g2 enabled.
SpectrumResult g2_sweep(const std::vector<LaserFramePoint>& points, const BareParameters& bare, DrivenOptions options);
/// Smallest defined g2 of a sweep; nullopt when none is defined.
std::optional<G2Minimum> g2_minimum(const SpectrumResult& result);

struct Peak {
  double position = 0.0;
  double height = 0.0;
  std::size_t index = 0;
};

struct PeakReport {
  std::vector<Peak> peaks;  // sorted by position
  std::optional<double> half_splitting;
  std::optional<double> lower;  // position of the lower of the two tallest peaks
  std::optional<double> upper;
  /// Height of the upper tallest peak over the lower one.
  std::optional<double> asymmetry;
};

/// Local maxima with 3-point parabolic refinement.
PeakReport peak_analysis(const std::vector<double>& x, const std::vector<double>& y);
PeakReport peak_analysis(const SpectrumResult& spectrum);

/// Columns: omega_L, T_c, g2, P_B, valid (g2 empty when undefined).
void write_spectrum_csv(std::ostream& os, const SpectrumResult& result);
/// Sidecar with method, digest, seed, drive and the cutoff checks.
std::string spectrum_sidecar_json(const SpectrumResult& result);

}  // namespace eqed
