#include "eqed/liouville.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseLU>
#include <boost/numeric/odeint.hpp>

#include "eqed/dipole_kernel.hpp"
#include "eqed/error.hpp"

namespace eqed {

namespace {

using Triplet = Eigen::Triplet<cplx>;

bool spin_excited(std::size_t index, const HilbertConfig& h, int which) {
  const int bit = h.n_two_level_systems - 1 - which;
  return ((index % h.spin_dimension()) >> bit) & 1U;
}

int photon_count(std::size_t index, const HilbertConfig& h) { return static_cast<int>(index / h.spin_dimension()); }

// kron(A, B)[(r1 * rows_B + r2), (c1 * cols_B + c2)] = A(r1, c1) B(r2, c2)
SparseCMatrix kron(const SparseCMatrix& A, const SparseCMatrix& B) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros()) * static_cast<std::size_t>(B.nonZeros()));
  for (int ca = 0; ca < A.outerSize(); ++ca)
    for (SparseCMatrix::InnerIterator ia(A, ca); ia; ++ia)
      for (int cb = 0; cb < B.outerSize(); ++cb)
        for (SparseCMatrix::InnerIterator ib(B, cb); ib; ++ib)
          t.emplace_back(ia.row() * B.rows() + ib.row(), ia.col() * B.cols() + ib.col(), ia.value() * ib.value());
  SparseCMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

cplx trace_product(const SparseCMatrix& op, const CMatrix& rho) {
  cplx acc = 0.0;
  for (int c = 0; c < op.outerSize(); ++c)
    for (SparseCMatrix::InnerIterator it(op, c); it; ++it) acc += it.value() * rho(it.col(), it.row());
  return acc;
}

}  // namespace

void HilbertConfig::validate() const {
  if (n_photon_max < 1) throw InvalidArgument("hilbert: n_photon_max must be >= 1");
  if (n_two_level_systems < 0) throw InvalidArgument("hilbert: n_two_level_systems must be >= 0");
  if (n_two_level_systems > 30 || dimension() > dimension_limit) {
    std::ostringstream os;
    os << "hilbert: dimension (" << n_photon_max + 1 << " x 2^" << n_two_level_systems
       << ") exceeds the limit " << dimension_limit;
    throw InvalidArgument(os.str());
  }
}

std::size_t HilbertConfig::index(int n, const std::vector<int>& excited) const {
  if (n < 0 || n > n_photon_max) throw InvalidArgument("hilbert: photon number outside the cutoff");
  std::size_t spins = 0;
  for (int which : excited) {
    if (which < 0 || which >= n_two_level_systems) throw InvalidArgument("hilbert: spin index out of range");
    spins |= std::size_t{1} << (n_two_level_systems - 1 - which);
  }
  return static_cast<std::size_t>(n) * spin_dimension() + spins;
}

SparseCMatrix annihilation(const HilbertConfig& h) {
  const auto D = static_cast<Eigen::Index>(h.dimension());
  const auto S = static_cast<Eigen::Index>(h.spin_dimension());
  std::vector<Triplet> t;
  for (Eigen::Index i = S; i < D; ++i) t.emplace_back(i - S, i, std::sqrt(static_cast<double>(i / S)));
  SparseCMatrix a(D, D);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SparseCMatrix lowering(const HilbertConfig& h, int which) {
  if (which < 0 || which >= h.n_two_level_systems) throw InvalidArgument("lowering: spin index out of range");
  const auto D = static_cast<Eigen::Index>(h.dimension());
  const Eigen::Index mask = Eigen::Index{1} << (h.n_two_level_systems - 1 - which);
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < D; ++i)
    if (i & mask) t.emplace_back(i & ~mask, i, 1.0);
  SparseCMatrix s(D, D);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SparseCMatrix identity(const HilbertConfig& h) {
  const auto D = static_cast<Eigen::Index>(h.dimension());
  SparseCMatrix id(D, D);
  id.setIdentity();
  return id;
}

DensityMatrix DensityMatrix::pure(const HilbertConfig& h, const CVector& psi) {
  if (static_cast<std::size_t>(psi.size()) != h.dimension()) throw InvalidArgument("pure state: dimension mismatch");
  const double nrm = psi.norm();
  if (!(nrm > 0.0)) throw InvalidArgument("pure state: zero vector");
  const CVector u = psi / nrm;
  return {u * u.adjoint(), h};
}

DensityMatrix DensityMatrix::basis_state(const HilbertConfig& h, std::size_t index) {
  const auto D = static_cast<Eigen::Index>(h.dimension());
  if (index >= h.dimension()) throw InvalidArgument("basis state: index out of range");
  CMatrix rho = CMatrix::Zero(D, D);
  rho(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return {rho, h};
}

DensityMatrix DensityMatrix::fock(const HilbertConfig& h, int n) { return basis_state(h, h.index(n)); }

double DensityMatrix::min_eigenvalue() const {
  const CMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate() const {
  if (static_cast<std::size_t>(rho.rows()) != hilbert.dimension() || rho.rows() != rho.cols())
    throw InvalidArgument("density matrix: shape does not match the Hilbert space");
  if (!rho.allFinite()) throw InvalidArgument("density matrix: non-finite entries");
  if (hermiticity_error() > 1e-10) throw InvalidArgument("density matrix: not Hermitian within 1e-10");
  if (trace_error() > 1e-8) throw InvalidArgument("density matrix: trace differs from 1 by more than 1e-8");
  if (min_eigenvalue() < -1e-8) throw InvalidArgument("density matrix: eigenvalue below -1e-8");
}

Superoperator::Superoperator(HilbertConfig hilbert, SparseCMatrix hamiltonian, std::vector<SparseCMatrix> jump_ops,
                             Eigen::MatrixXd rates)
    : hilbert_(hilbert), hamiltonian_(std::move(hamiltonian)), jumps_(std::move(jump_ops)), rates_(std::move(rates)) {
  hilbert_.validate();
  const auto D = static_cast<Eigen::Index>(hilbert_.dimension());
  const auto K = static_cast<Eigen::Index>(jumps_.size());
  if (hamiltonian_.rows() != D || hamiltonian_.cols() != D) throw InvalidArgument("superoperator: Hamiltonian shape");
  if (rates_.rows() != K || rates_.cols() != K) throw InvalidArgument("superoperator: rate matrix shape");
  if (K > 0 && (rates_ - rates_.transpose()).cwiseAbs().maxCoeff() > 0.0)
    throw InvalidArgument("superoperator: rate matrix must be symmetric");

  SparseCMatrix K_op(D, D);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index l = 0; l < K; ++l)
      if (rates_(k, l) != 0.0) K_op += rates_(k, l) * SparseCMatrix(jumps_[k].adjoint() * jumps_[l]);
  h_nonhermitian_ = hamiltonian_ - cplx(0.0, 1.0) * K_op;
  h_nonhermitian_.makeCompressed();

  if (hilbert_.dimension() <= kMaxAssembledDimension) {
    const SparseCMatrix id = identity(hilbert_);
    const cplx I(0.0, 1.0);
    matrix_ = -I * kron(id, h_nonhermitian_) + I * kron(SparseCMatrix(h_nonhermitian_.conjugate()), id);
    for (Eigen::Index k = 0; k < K; ++k)
      for (Eigen::Index l = 0; l < K; ++l)
        if (rates_(k, l) != 0.0)
          matrix_ += 2.0 * rates_(k, l) * kron(SparseCMatrix(jumps_[k].conjugate()), jumps_[l]);
    matrix_.prune(cplx(0.0));
    matrix_.makeCompressed();
    assembled_ = true;
  }
}

const SparseCMatrix& Superoperator::matrix() const {
  if (!assembled_) throw InvalidArgument("superoperator: dimension too large for an assembled matrix");
  return matrix_;
}

CMatrix Superoperator::dense() const {
  if (dimension() * dimension() > 4096) throw InvalidArgument("superoperator: dense form limited to D^2 <= 4096");
  return CMatrix(matrix());
}

CMatrix Superoperator::apply_matrix_free(const CMatrix& rho) const {
  const cplx I(0.0, 1.0);
  CMatrix out = -I * (h_nonhermitian_ * rho);
  out += I * (rho * h_nonhermitian_.adjoint());
  const auto K = static_cast<Eigen::Index>(jumps_.size());
  for (Eigen::Index k = 0; k < K; ++k) {
    const SparseCMatrix lk_dag = jumps_[k].adjoint();
    for (Eigen::Index l = 0; l < K; ++l)
      if (rates_(k, l) != 0.0) out += 2.0 * rates_(k, l) * (jumps_[l] * (rho * lk_dag));
  }
  return out;
}

CVector Superoperator::apply(const CVector& vec_rho) const {
  if (assembled_) return matrix_ * vec_rho;
  const auto D = static_cast<Eigen::Index>(dimension());
  const CMatrix rho = Eigen::Map<const CMatrix>(vec_rho.data(), D, D);
  const CMatrix out = apply_matrix_free(rho);
  return Eigen::Map<const CVector>(out.data(), D * D);
}

CMatrix Superoperator::apply(const CMatrix& rho) const {
  if (!assembled_) return apply_matrix_free(rho);
  const auto D = static_cast<Eigen::Index>(dimension());
  const CVector v = matrix_ * Eigen::Map<const CVector>(rho.data(), D * D);
  return Eigen::Map<const CMatrix>(v.data(), D, D);
}

Superoperator build_full_liouvillian(const EmitterLayout& layout, const BareParameters& bare,
                                     const std::optional<Drive>& drive, const HilbertConfig& hilbert_in) {
  layout.validate();
  HilbertConfig h = hilbert_in;
  h.n_two_level_systems = 1 + static_cast<int>(layout.size());
  h.validate();

  const double delta = drive ? drive->laser_detuning : 0.0;
  const int S = h.n_two_level_systems;
  const SparseCMatrix a = annihilation(h);
  std::vector<SparseCMatrix> ops{a};
  for (int j = 0; j < S; ++j) ops.push_back(lowering(h, j));

  std::vector<Position3> pos{layout.target};
  pos.insert(pos.end(), layout.ensemble.begin(), layout.ensemble.end());
  std::vector<double> gamma(S, layout.gamma_B), det(S, 0.0), gc(S, 0.0);
  gamma[0] = layout.gamma_A;
  gc[0] = bare.g_A;
  for (int j = 1; j < S; ++j) {
    det[j] = layout.detunings[j - 1];
    gc[j] = cavity_coupling(pos[j], layout.g0_B, layout.wavenumber);
  }

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(S + 1, S + 1);
  C(0, 0) = bare.kappa;
  SparseCMatrix H = (bare.delta_c - delta) * SparseCMatrix(a.adjoint() * a);
  for (int i = 0; i < S; ++i) {
    const SparseCMatrix& si = ops[i + 1];
    C(i + 1, i + 1) = gamma[i];
    H += (det[i] - delta) * SparseCMatrix(si.adjoint() * si);
    H += gc[i] * SparseCMatrix(a.adjoint() * si + si.adjoint() * a);
    for (int j = i + 1; j < S; ++j) {
      const auto V = coupling_kernel(pos[i] - pos[j], gamma[i], gamma[j], layout.wavenumber);
      C(i + 1, j + 1) = C(j + 1, i + 1) = V.gamma_cross;
      const SparseCMatrix& sj = ops[j + 1];
      H += V.omega * SparseCMatrix(si.adjoint() * sj + sj.adjoint() * si);
    }
  }
  if (drive) H += drive->phi * SparseCMatrix(a + SparseCMatrix(a.adjoint()));
  return Superoperator(h, H, std::move(ops), C);
}

Superoperator build_effective_liouvillian(const EffectiveParameters& p, const std::optional<double>& phi,
                                          const HilbertConfig& hilbert) {
  if (hilbert.n_two_level_systems != 1)
    throw InvalidArgument("effective model: Hilbert space must hold exactly one two-level system");
  const SparseCMatrix a = annihilation(hilbert);
  const SparseCMatrix s = lowering(hilbert, 0);
  SparseCMatrix H = p.delta_c_eff * SparseCMatrix(a.adjoint() * a) + p.delta_A_eff * SparseCMatrix(s.adjoint() * s) +
                    p.g_A_eff * SparseCMatrix(a.adjoint() * s + s.adjoint() * a);
  if (phi) H += *phi * SparseCMatrix(a + SparseCMatrix(a.adjoint()));
  Eigen::MatrixXd C(2, 2);
  C << p.kappa_eff, p.mu, p.mu, p.gamma_A_eff;
  return Superoperator(hilbert, H, {a, s}, C);
}

Observables observables(const DensityMatrix& state) {
  const auto& h = state.hilbert;
  const auto& rho = state.rho;
  const auto D = static_cast<Eigen::Index>(h.dimension());
  if (rho.rows() != D || rho.cols() != D) throw InvalidArgument("observables: shape mismatch");
  Observables o;
  const int S = h.n_two_level_systems;
  o.populations_B.assign(S > 1 ? S - 1 : 0, 0.0);
  double pairs = 0.0;
  for (Eigen::Index i = 0; i < D; ++i) {
    const double p = rho(i, i).real();
    const int n = photon_count(static_cast<std::size_t>(i), h);
    o.photon_number += n * p;
    pairs += n * (n - 1) * p;
    if (S > 0 && spin_excited(static_cast<std::size_t>(i), h, 0)) o.population_A += p;
    for (int j = 1; j < S; ++j)
      if (spin_excited(static_cast<std::size_t>(i), h, j)) o.populations_B[j - 1] += p;
  }
  for (double pb : o.populations_B) o.population_B_total += pb;
  if (o.photon_number >= 1e-12) o.g2_zero = pairs / (o.photon_number * o.photon_number);
  if (S > 0) {
    const SparseCMatrix a = annihilation(h);
    o.coherence = trace_product(SparseCMatrix(SparseCMatrix(a.adjoint()) * lowering(h, 0)), rho);
  }
  o.trace_error = state.trace_error();
  return o;
}

double g2_zero(const DensityMatrix& state) {
  const auto o = observables(state);
  if (!o.g2_zero) throw UndefinedObservable("g2(0) undefined: photon number below 1e-12");
  return *o.g2_zero;
}

Trajectory evolve(const Superoperator& L, const DensityMatrix& rho0, const std::vector<double>& t_grid,
                  const EvolveOptions& opt) {
  namespace ode = boost::numeric::odeint;
  rho0.validate();
  if (static_cast<std::size_t>(rho0.rho.rows()) != L.dimension())
    throw InvalidArgument("evolve: state dimension does not match the generator");
  if (t_grid.empty()) return {};
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("evolve: time grid must be strictly increasing");

  const auto D = static_cast<Eigen::Index>(L.dimension());
  const Eigen::Index n2 = D * D;
  using State = std::vector<double>;
  State x(static_cast<std::size_t>(2 * n2));
  Eigen::Map<CVector>(reinterpret_cast<cplx*>(x.data()), n2) = Eigen::Map<const CVector>(rho0.rho.data(), n2);

  auto rhs = [&](const State& in, State& out, double) {
    Eigen::Map<const CVector> vin(reinterpret_cast<const cplx*>(in.data()), n2);
    Eigen::Map<CVector> vout(reinterpret_cast<cplx*>(out.data()), n2);
    if (L.has_matrix()) {
      vout.noalias() = L.matrix() * vin;
    } else {
      const CMatrix r = Eigen::Map<const CMatrix>(vin.data(), D, D);
      const CMatrix d = L.apply_matrix_free(r);
      vout = Eigen::Map<const CVector>(d.data(), n2);
    }
  };

  Trajectory traj;
  double last_good = t_grid.front();
  auto observer = [&](const State& s, double t) {
    DensityMatrix st{Eigen::Map<const CMatrix>(reinterpret_cast<const cplx*>(s.data()), D, D), rho0.hilbert};
    if (!st.rho.allFinite()) throw IntegrationError("evolve: state became non-finite", last_good);
    traj.times.push_back(t);
    traj.observables.push_back(observables(st));
    if (opt.keep_states) traj.states.push_back(std::move(st));
    last_good = t;
  };

  try {
    auto stepper = ode::make_dense_output(opt.atol, opt.rtol, ode::runge_kutta_dopri5<State>());
    ode::integrate_times(stepper, rhs, x, t_grid.begin(), t_grid.end(), opt.initial_step, observer,
                         ode::max_step_checker(1000000));
  } catch (const IntegrationError&) {
    throw;
  } catch (const std::exception& e) {
    throw IntegrationError(std::string("evolve: integrator failed: ") + e.what(), last_good);
  }
  return traj;
}

DensityMatrix steady_state(const Superoperator& L) {
  const auto D = static_cast<Eigen::Index>(L.dimension());
  const Eigen::Index n2 = D * D;
  const SparseCMatrix& A = L.matrix();

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() + D));
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseCMatrix::InnerIterator it(A, c); it; ++it)
      if (it.row() != 0) t.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < D; ++i) t.emplace_back(0, i + i * D, 1.0);
  SparseCMatrix B(n2, n2);
  B.setFromTriplets(t.begin(), t.end());
  CVector rhs = CVector::Zero(n2);
  rhs(0) = 1.0;

  CVector x;
  if (n2 <= 4096) {
    const CMatrix Bd(B);
    Eigen::PartialPivLU<CMatrix> lu(Bd);
    // rcond() is not reliable with exactly zero pivots
    const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
    const double rc = std::min(lu.rcond(), piv.minCoeff() / piv.maxCoeff());
    if (!(rc > 1e-13)) {
      std::ostringstream os;
      os << "steady state: null space is degenerate (reciprocal condition " << rc << ")";
      throw DegenerateNullSpace(os.str());
    }
    x = lu.solve(rhs);
  } else {
    B.makeCompressed();
    Eigen::SparseLU<SparseCMatrix> lu;
    lu.compute(B);
    if (lu.info() != Eigen::Success) throw DegenerateNullSpace("steady state: factorization failed (degenerate null space)");
    x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite())
      throw DegenerateNullSpace("steady state: solve failed (degenerate null space)");
  }
  CMatrix rho = Eigen::Map<const CMatrix>(x.data(), D, D);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return {rho, L.hilbert()};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,n_photon,P_A,P_B_total,trace_error\n" << std::setprecision(12);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& o = traj.observables[i];
    os << traj.times[i] << ',' << o.photon_number << ',' << o.population_A << ',' << o.population_B_total << ','
       << o.trace_error << '\n';
  }
}

void write_state(std::ostream& os, const DensityMatrix& state) {
  const auto D = state.rho.rows();
  os << "# dim=" << D << " order=row-major values=re,im\n" << std::setprecision(17);
  for (Eigen::Index r = 0; r < D; ++r) {
    for (Eigen::Index c = 0; c < D; ++c) {
      if (c) os << ',';
      os << state.rho(r, c).real() << ',' << state.rho(r, c).imag();
    }
    os << '\n';
  }
}

DensityMatrix read_state(std::istream& is, const HilbertConfig& hilbert) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# dim=", 0) != 0) throw InvalidArgument("state dump: missing header");
  const long D = std::stol(line.substr(6));
  if (D <= 0 || static_cast<std::size_t>(D) != hilbert.dimension())
    throw InvalidArgument("state dump: dimension does not match the Hilbert space");
  CMatrix rho(D, D);
  for (long r = 0; r < D; ++r) {
    if (!std::getline(is, line)) throw InvalidArgument("state dump: truncated");
    std::stringstream ss(line);
    std::string cell;
    for (long c = 0; c < D; ++c) {
      double re = 0, im = 0;
      if (!std::getline(ss, cell, ',')) throw InvalidArgument("state dump: short row");
      re = std::stod(cell);
      if (!std::getline(ss, cell, ',')) throw InvalidArgument("state dump: short row");
      im = std::stod(cell);
      rho(r, c) = cplx(re, im);
    }
  }
  return {rho, hilbert};
}

}  // namespace eqed
