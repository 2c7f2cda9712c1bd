#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "eqed/effective_model.hpp"
#include "eqed/geometry.hpp"
#include "eqed/types.hpp"

namespace eqed {

using SparseCMatrix = Eigen::SparseMatrix<cplx>;

/// Truncated Fock space times n_two_level_systems spins. Basis index
/// = n * 2^S + spin bits, with the target spin as the most significant bit
/// and the ensemble following in layout order; spin bit 1 is excited.
struct HilbertConfig {
  int n_photon_max = 3;
  int n_two_level_systems = 1;
  std::size_t dimension_limit = 4096;

  std::size_t spin_dimension() const { return std::size_t{1} << n_two_level_systems; }
  std::size_t dimension() const { return static_cast<std::size_t>(n_photon_max + 1) * spin_dimension(); }
  /// Throws InvalidArgument with the offending bound.
  void validate() const;
  /// Basis index of |n; spins> with `excited` listing excited spin indices.
  std::size_t index(int n, const std::vector<int>& excited = {}) const;
};

/// Sparse operators on a HilbertConfig.
SparseCMatrix annihilation(const HilbertConfig& h);
/// Lowering operator of spin `which` (0 is the target).
SparseCMatrix lowering(const HilbertConfig& h, int which);
SparseCMatrix identity(const HilbertConfig& h);

struct DensityMatrix {
  CMatrix rho;
  HilbertConfig hilbert;

  static DensityMatrix pure(const HilbertConfig& h, const CVector& psi);
  static DensityMatrix basis_state(const HilbertConfig& h, std::size_t index);
  /// |n photons> with all spins in the ground state.
  static DensityMatrix fock(const HilbertConfig& h, int n);

  double trace_error() const { return std::abs(rho.trace() - cplx(1.0)); }
  double hermiticity_error() const { return (rho - rho.adjoint()).norm(); }
  double min_eigenvalue() const;
  /// Hermitian within 1e-10, unit trace within 1e-8, eigenvalues >= -1e-8.
  /// Throws InvalidArgument naming the violated bound.
  void validate() const;
};

/// Lindblad generator on column-major vectorized density matrices,
/// vec(A rho B) = (B^T kron A) vec(rho). The dissipator is
/// sum_kl C_kl (2 L_l rho L_k^+ - L_k^+ L_l rho - rho L_k^+ L_l) with a real
/// symmetric rate matrix C, which is the D(x,y) form with cross terms.
class Superoperator {
 public:
  Superoperator(HilbertConfig hilbert, SparseCMatrix hamiltonian, std::vector<SparseCMatrix> jump_ops,
                Eigen::MatrixXd rates);

  const HilbertConfig& hilbert() const { return hilbert_; }
  std::size_t dimension() const { return hilbert_.dimension(); }
  const SparseCMatrix& hamiltonian() const { return hamiltonian_; }
  const Eigen::MatrixXd& rates() const { return rates_; }

  /// Assembled D^2 x D^2 generator. Only available up to kMaxAssembledDimension.
  bool has_matrix() const { return assembled_; }
  const SparseCMatrix& matrix() const;
  /// Dense copy; refuses dimensions with D^2 above 4096.
  CMatrix dense() const;

  /// Uses the assembled matrix when present, otherwise the matrix-free path.
  CVector apply(const CVector& vec_rho) const;
  CMatrix apply(const CMatrix& rho) const;
  /// Operator-level evaluation without the D^2 matrix.
  CMatrix apply_matrix_free(const CMatrix& rho) const;

  static constexpr std::size_t kMaxAssembledDimension = 1024;

 private:
  HilbertConfig hilbert_;
  SparseCMatrix hamiltonian_;
  SparseCMatrix h_nonhermitian_;
  std::vector<SparseCMatrix> jumps_;
  Eigen::MatrixXd rates_;
  SparseCMatrix matrix_;
  bool assembled_ = false;
};

/// Coherent cavity drive phi (a + a^+) at laser detuning omega_L - omega_A.
struct Drive {
  double phi = 0.0;
  double laser_detuning = 0.0;
};

/// Cavity, target and every ensemble emitter, with dipole exchange and
/// correlated decay among all emitter pairs. Without a drive the frame
/// rotates at omega_A. Throws InvalidArgument on dimension overflow and
/// KernelSingularity on coinciding emitters.
Superoperator build_full_liouvillian(const EmitterLayout& layout, const BareParameters& bare,
                                     const std::optional<Drive>& drive, const HilbertConfig& hilbert);

/// Reduced target-cavity model with cross-decay mu. Parameters are taken in
/// whatever frame they were computed in; the drive adds phi (a + a^+).
/// The Hilbert config must have exactly one two-level system.
Superoperator build_effective_liouvillian(const EffectiveParameters& params, const std::optional<double>& phi,
                                          const HilbertConfig& hilbert);

struct Observables {
  double photon_number = 0.0;
  double population_A = 0.0;
  std::vector<double> populations_B;
  double population_B_total = 0.0;
  /// <a^+ a^+ a a> / <a^+ a>^2, absent when the photon number is below 1e-12.
  std::optional<double> g2_zero;
  cplx coherence;  // <a^+ sigma_A^->
  double trace_error = 0.0;
};

Observables observables(const DensityMatrix& state);
/// Same as observables().g2_zero but throws UndefinedObservable when absent.
double g2_zero(const DensityMatrix& state);

struct EvolveOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 1e-4;
  bool keep_states = false;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Observables> observables;
  std::vector<DensityMatrix> states;  // filled when keep_states
};

/// Adaptive Dormand-Prince integration with dense output at the grid times.
/// Throws IntegrationError carrying the last time that was reached.
Trajectory evolve(const Superoperator& generator, const DensityMatrix& rho0, const std::vector<double>& t_grid,
                  const EvolveOptions& options = {});

/// Null-space element with unit trace: the vectorized generator with its
/// first row replaced by the trace functional. Throws DegenerateNullSpace
/// when that system is rank deficient.
DensityMatrix steady_state(const Superoperator& generator);

/// Columns: t, n_photon, P_A, P_B_total, trace_error
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);
/// "# dim=D order=row-major values=re,im" then D rows of 2D numbers.
void write_state(std::ostream& os, const DensityMatrix& state);
DensityMatrix read_state(std::istream& is, const HilbertConfig& hilbert);

}  // namespace eqed
