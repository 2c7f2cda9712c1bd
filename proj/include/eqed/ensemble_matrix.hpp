#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "eqed/geometry.hpp"
#include "eqed/types.hpp"

namespace eqed {

/// Linear response of the weakly excited ensemble:
///   M_jl = (Delta_j - frame - i gamma_B) delta_jl + (1 - delta_jl) V_jl,
///   g_j  = g0_B cos(k y_j),   v_j = V_jA.
/// `frame_detuning` is omega_L - omega_A (0 in the frame of the target).
struct CouplingSystem {
  CMatrix M;
  RVector g;
  CVector v;
  double frame_detuning = 0.0;

  Eigen::Index size() const { return g.size(); }

  /// Same system seen from a frame rotating `delta` faster: M - delta I.
  CouplingSystem shifted(double delta) const;
};

CouplingSystem assemble(const EmitterLayout& layout, double frame_detuning = 0.0);

/// Eigen-decomposition of M with columns normalized so that x^T x = 1
/// (bilinear, no conjugation). Degenerate clusters are re-orthogonalized
/// in the same bilinear form.
struct ModeSet {
  CVector eigenvalues;
  CMatrix eigenvectors;
  /// max |(X^T X - 1)_ij|, which equals the completeness error of sum x x^T.
  double completeness_residual = 0.0;
  /// max_eta |M x - lambda x| / (|M| |x|)
  double eigen_residual = 0.0;
  /// True when some mode has x^T x ~ 0 (M close to defective); modal
  /// formulas must not be used then.
  bool flagged = false;
  std::string flag_reason;

  Eigen::Index size() const { return eigenvalues.size(); }
};

ModeSet eigenmodes(const CouplingSystem& system);

/// Eigenvalues only (cheaper; no vectors).
CVector eigenvalues(const CouplingSystem& system);

struct ModeContribution {
  cplx eigenvalue;
  cplx overlap_g;  // g^T x
  cplx overlap_v;  // v^T x
  /// -Re(g^T x x^T v / lambda)
  double delta_g = 0.0;
};

/// Per-mode share of g_A^eff - g_A. Throws NumericalFailure on a flagged set.
std::vector<ModeContribution> mode_contributions(const CouplingSystem& system, const ModeSet& modes);

/// -Re(g^T M^{-1} v) by a direct LU solve.
double delta_g_direct(const CouplingSystem& system);

/// Expectation values of the reduced system used to estimate P_B.
struct ReducedExpectations {
  double photon_number = 0.0;      // <a^dag a>
  double target_population = 0.0;  // <sigma_A^+ sigma_A^->
  cplx coherence{0.0, 0.0};        // <a^dag sigma_A^->
};

/// P_B = g^T (M M^dag)^{-1} g <n> + v*^T (M M^dag)^{-1} v <P_A>
///     + g^T (M M^dag)^{-1} v <a^dag s> + v*^T (M M^dag)^{-1} g <s^+ a>.
/// Throws NumericalFailure when M is singular.
double estimate_ensemble_population(const CouplingSystem& system, const ReducedExpectations& expectations);

/// P_B for one cavity photon: g^T (M M^dag)^{-1} g.
double one_photon_population(const CouplingSystem& system);

enum class AdiabaticityGrade { Pass, Warn, Fail };

const char* to_string(AdiabaticityGrade grade);

struct ReducedRates {
  double kappa = 0.0;
  double gamma_A = 0.0;
  double g_A = 0.0;
};

struct AdiabaticityReport {
  double min_abs_eigenvalue = std::numeric_limits<double>::infinity();
  /// min |lambda| / max(kappa, gamma_A, |g_A|)
  double ratio = std::numeric_limits<double>::infinity();
  double one_photon_population = 0.0;
  AdiabaticityGrade grade = AdiabaticityGrade::Pass;
};

/// Pass: min|lambda| >= 10 max(rates) and P_B <= 0.05.
/// Warn: both bounds met after relaxing each by a factor 3. Fail otherwise.
AdiabaticityGrade grade_adiabaticity(double min_abs_eigenvalue, double rate_scale, double population);

AdiabaticityReport adiabaticity_report(const CouplingSystem& system, const ReducedRates& rates);
AdiabaticityReport adiabaticity_report(const CouplingSystem& system, const CVector& eigenvalues,
                                       const ReducedRates& rates);

/// Matrix text dump: a header line
///   "# rows=R cols=C order=row-major values=re,im"
/// followed by R lines of 2C comma-separated numbers.
void write_matrix_csv(std::ostream& os, const CMatrix& matrix);
CMatrix read_matrix_csv(std::istream& is);

/// Writes <prefix>M.csv, <prefix>g.csv, <prefix>v.csv (column vectors) and,
/// if given, <prefix>eigenvalues.csv.
void dump_system(const std::string& prefix, const CouplingSystem& system, const ModeSet* modes = nullptr);

}  // namespace eqed
