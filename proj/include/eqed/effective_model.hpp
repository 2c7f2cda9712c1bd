#pragma once

#include <functional>
#include <string>
#include <vector>

#include "eqed/ensemble_matrix.hpp"
#include "eqed/geometry.hpp"
#include "eqed/resolvent.hpp"

namespace eqed {

/// Bare target-cavity parameters in the frame of omega_A.
struct BareParameters {
  double delta_c = 0.0;  // omega_c - omega_A
  double g_A = 1.0;      // g0_A cos(k y_A)
  double kappa = 0.0;
  double gamma_A = 0.0;
};

/// g_A from the layout, plus the given cavity detuning and loss.
BareParameters bare_parameters(const EmitterLayout& layout, double delta_c, double kappa);

/// Parameters of the reduced target-cavity master equation. All detunings
/// are measured in the frame rotating at omega_A + frame_detuning.
struct EffectiveParameters {
  double delta_c_eff = 0.0;
  double delta_A_eff = 0.0;
  double g_A_eff = 0.0;
  double kappa_eff = 0.0;
  double gamma_A_eff = 0.0;
  double mu = 0.0;
  double frame_detuning = 0.0;

  /// kappa_eff >= 0 and gamma_A_eff >= 0; false signals a breakdown of
  /// the elimination (values are reported unclamped).
  bool physically_valid() const { return kappa_eff >= 0.0 && gamma_A_eff >= 0.0; }
  /// Human-readable reasons physically_valid() is false (empty otherwise).
  std::vector<std::string> warnings() const;
};

/// Combines resolvent bilinear forms (evaluated at `frame_detuning`) with the
/// bare parameters.
EffectiveParameters effective_parameters(const ResolventSample& sample, const BareParameters& bare,
                                         double frame_detuning = 0.0);

/// Direct-solve effective parameters in the frame the system was assembled
/// in. Throws NumericalFailure with the reciprocal condition number when M is
/// singular.
EffectiveParameters effective_parameters(const CouplingSystem& system, const BareParameters& bare);

/// Inputs of the single point-dipole closed forms.
struct PointDipoleInputs {
  double g0_A = 1.0;
  double g0_B = 1.0;
  double kappa = 0.0;
  double gamma_A = 0.0;
  double gamma_B = 0.0;
  double delta_B = 0.0;
  double delta_c = 0.0;
  double wavenumber = kDefaultWavenumber;
};

/// Closed-form effective parameters for one point dipole B at r_A +
/// separation. The coherent coupling uses the identical-dipole form, which
/// requires g0_B sqrt(gamma_A gamma_B) = g0_A gamma_B (checked).
/// Throws InvalidArgument when Delta_B^2 + gamma_B^2 = 0.
EffectiveParameters point_dipole_parameters(const Position3& separation, double y_A, double y_B,
                                            const PointDipoleInputs& in);

struct DecayRates {
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
};

/// Eigen-rates of [[kappa_eff, mu], [mu, gamma_A_eff]].
DecayRates gamma_pm(const EffectiveParameters& params);

/// |g_A_eff| > gamma_plus
bool strongly_coupled(const EffectiveParameters& params);

/// Secant search for the cavity detuning that makes delta_A_eff equal
/// delta_c_eff. `evaluate` maps a trial delta_c to effective parameters.
double compensate_cavity_detuning(const std::function<EffectiveParameters(double)>& evaluate, double initial_delta_c,
                                  double tolerance, int max_iterations = 50);

enum class DipolePlane { XZ, YZ };

struct StrongCouplingMapConfig {
  PointDipoleInputs dipole;
  Position3 target;
  DipolePlane plane = DipolePlane::XZ;
  double r_min = 0.01;
  double r_max = 0.2;
  int r_points = 100;
  double theta_min = 0.0;
  double theta_max = 0.5 * 3.141592653589793;
  int theta_points = 100;
};

struct StrongCouplingCell {
  double r = 0.0;
  double theta = 0.0;
  double g_A_eff = 0.0;
  double gamma_plus = 0.0;
  double ratio = 0.0;  // |g_A_eff / gamma_plus|
  bool strong = false;
  bool skipped = false;  // separation below kMinSeparation
};

struct StrongCouplingMap {
  int r_points = 0;
  int theta_points = 0;
  /// Row-major over (r, theta), theta fastest.
  std::vector<StrongCouplingCell> cells;

  const StrongCouplingCell& at(int ir, int itheta) const { return cells[static_cast<std::size_t>(ir * theta_points + itheta)]; }
};

/// Point-dipole map of |g_A_eff / gamma_+| over (r, theta). B sits at
/// target + r (sin t, 0, cos t) in the XZ plane or target + r (0, sin t, cos t)
/// in the YZ plane.
StrongCouplingMap strong_coupling_map(const StrongCouplingMapConfig& config);

/// CSV columns: r, theta, g_A_eff, gamma_plus, ratio, strong
void write_strong_coupling_csv(std::ostream& os, const StrongCouplingMap& map);

}  // namespace eqed
