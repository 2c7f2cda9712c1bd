#include "eqed/ensemble_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "detail/lapack.hpp"
#include "eqed/dipole_kernel.hpp"
#include "eqed/error.hpp"

namespace eqed {

CouplingSystem CouplingSystem::shifted(double delta) const {
  CouplingSystem out = *this;
  out.M.diagonal().array() -= delta;
  out.frame_detuning += delta;
  return out;
}

CouplingSystem assemble(const EmitterLayout& layout, double frame_detuning) {
  layout.validate();
  const auto n = static_cast<Eigen::Index>(layout.size());
  const double k = layout.wavenumber;
  CouplingSystem sys;
  sys.frame_detuning = frame_detuning;
  sys.M.resize(n, n);
  sys.g.resize(n);
  sys.v.resize(n);

#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& rj = layout.ensemble[j];
    sys.M(j, j) = cplx(layout.detunings[j] - frame_detuning, -layout.gamma_B);
    for (Eigen::Index l = j + 1; l < n; ++l) {
      const cplx vjl = coupling_kernel(rj - layout.ensemble[l], layout.gamma_B, layout.gamma_B, k).V;
      sys.M(j, l) = vjl;
      sys.M(l, j) = vjl;
    }
    sys.g(j) = cavity_coupling(rj, layout.g0_B, k);
    sys.v(j) = coupling_kernel(rj - layout.target, layout.gamma_A, layout.gamma_B, k).V;
  }
  return sys;
}

namespace {

Eigen::PartialPivLU<CMatrix> factorize(const CMatrix& m, const char* what) {
  Eigen::PartialPivLU<CMatrix> lu(m);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    std::ostringstream os;
    os << what << ": coupling matrix is singular (reciprocal condition " << rc << ")";
    throw NumericalFailure(os.str());
  }
  return lu;
}

cplx bilinear(const CVector& a, const CVector& b) { return (a.transpose() * b).value(); }

// Pivoted Gram-Schmidt in the bilinear form x^T y over the columns `idx`.
// Returns the smallest relative transpose-norm |x^T x| / |x|^2 encountered.
double orthonormalize_cluster(CMatrix& x, const std::vector<Eigen::Index>& idx) {
  double worst = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> todo = idx;
  std::vector<Eigen::Index> done;
  while (!todo.empty()) {
    auto best = todo.begin();
    double best_q = -1.0;
    for (auto it = todo.begin(); it != todo.end(); ++it) {
      const CVector col = x.col(*it);
      const double q = std::abs(bilinear(col, col)) / col.squaredNorm();
      if (q > best_q) {
        best_q = q;
        best = it;
      }
    }
    const Eigen::Index c = *best;
    todo.erase(best);
    worst = std::min(worst, best_q);
    CVector col = x.col(c);
    const cplx tn = bilinear(col, col);
    col /= std::sqrt(tn);
    x.col(c) = col;
    for (Eigen::Index other : todo) {
      const cplx proj = bilinear(col, x.col(other));
      x.col(other) -= proj * col;
    }
    done.push_back(c);
  }
  return worst;
}

constexpr double kDefectThreshold = 1e-6;

}  // namespace

CVector eigenvalues(const CouplingSystem& system) {
  CVector w;
  detail::general_eigen(system.M, w, nullptr);
  return w;
}

ModeSet eigenmodes(const CouplingSystem& system) {
  ModeSet modes;
  const Eigen::Index n = system.size();
  if (n == 0) return modes;

  detail::general_eigen(system.M, modes.eigenvalues, &modes.eigenvectors);
  const CVector& w = modes.eigenvalues;
  CMatrix& x = modes.eigenvectors;

  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  const double cluster_tol = 1e-9 * scale;

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return w(a).real() < w(b).real() || (w(a).real() == w(b).real() && w(a).imag() < w(b).imag());
  });

  double worst = std::numeric_limits<double>::infinity();
  std::size_t start = 0;
  while (start < order.size()) {
    std::vector<Eigen::Index> cluster{order[start]};
    std::size_t end = start + 1;
    while (end < order.size()) {
      const cplx cand = w(order[end]);
      // real parts are sorted, so only the tail of the run can be close
      if (cand.real() - w(cluster.back()).real() > cluster_tol) break;
      const bool close = std::any_of(cluster.begin(), cluster.end(),
                                     [&](Eigen::Index c) { return std::abs(w(c) - cand) <= cluster_tol; });
      if (!close) break;
      cluster.push_back(order[end]);
      ++end;
    }
    worst = std::min(worst, orthonormalize_cluster(x, cluster));
    start = end;
  }

  if (worst < kDefectThreshold) {
    modes.flagged = true;
    std::ostringstream os;
    os << "near-defective coupling matrix: min |x^T x| / |x|^2 = " << worst;
    modes.flag_reason = os.str();
  }

  const CMatrix gram = x.transpose() * x;
  modes.completeness_residual = (gram - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();

  const CMatrix mx = system.M * x;
  const double mnorm = system.M.norm();
  double res = 0.0;
  for (Eigen::Index e = 0; e < n; ++e)
    res = std::max(res, (mx.col(e) - w(e) * x.col(e)).norm() / (mnorm * x.col(e).norm()));
  modes.eigen_residual = res;
  if (!modes.flagged && modes.completeness_residual > 1e-6) {
    modes.flagged = true;
    std::ostringstream os;
    os << "eigenvectors not complete: residual " << modes.completeness_residual;
    modes.flag_reason = os.str();
  }
  return modes;
}

std::vector<ModeContribution> mode_contributions(const CouplingSystem& system, const ModeSet& modes) {
  if (modes.flagged)
    throw NumericalFailure("mode_contributions: mode set is flagged (" + modes.flag_reason +
                           "); use the direct solve instead");
  if (modes.size() != system.size()) throw InvalidArgument("mode_contributions: mode set does not match system");
  const CVector gc = system.g.cast<cplx>();
  const CVector a = modes.eigenvectors.transpose() * gc;
  const CVector b = modes.eigenvectors.transpose() * system.v;
  std::vector<ModeContribution> out(static_cast<std::size_t>(modes.size()));
  for (Eigen::Index e = 0; e < modes.size(); ++e) {
    auto& c = out[static_cast<std::size_t>(e)];
    c.eigenvalue = modes.eigenvalues(e);
    c.overlap_g = a(e);
    c.overlap_v = b(e);
    c.delta_g = -(a(e) * b(e) / c.eigenvalue).real();
  }
  return out;
}

double delta_g_direct(const CouplingSystem& system) {
  if (system.size() == 0) return 0.0;
  const auto lu = factorize(system.M, "delta_g_direct");
  const CVector y = lu.solve(system.v);
  return -(system.g.cast<cplx>().transpose() * y).value().real();
}

double estimate_ensemble_population(const CouplingSystem& system, const ReducedExpectations& e) {
  if (system.size() == 0) return 0.0;
  const auto lu = factorize(system.M, "ensemble population");
  CMatrix rhs(system.size(), 2);
  rhs.col(0) = system.g.cast<cplx>();
  rhs.col(1) = system.v;
  const CMatrix y = lu.solve(rhs);
  const double ngg = y.col(0).squaredNorm();
  const double nvv = y.col(1).squaredNorm();
  const cplx ngv = y.col(0).dot(y.col(1));  // conjugates the first argument
  const cplx total = ngg * e.photon_number + nvv * e.target_population + ngv * e.coherence +
                     std::conj(ngv) * std::conj(e.coherence);
  return std::max(0.0, total.real());
}

double one_photon_population(const CouplingSystem& system) {
  return estimate_ensemble_population(system, {1.0, 0.0, {0.0, 0.0}});
}

const char* to_string(AdiabaticityGrade grade) {
  switch (grade) {
    case AdiabaticityGrade::Pass: return "pass";
    case AdiabaticityGrade::Warn: return "warn";
    case AdiabaticityGrade::Fail: return "fail";
  }
  return "?";
}

AdiabaticityGrade grade_adiabaticity(double min_abs_eigenvalue, double rate_scale, double population) {
  constexpr double kEigenFactor = 10.0;
  constexpr double kPopulationBound = 0.05;
  constexpr double kSlack = 3.0;
  const double lam_bound = kEigenFactor * rate_scale;
  if (min_abs_eigenvalue >= lam_bound && population <= kPopulationBound) return AdiabaticityGrade::Pass;
  if (min_abs_eigenvalue >= lam_bound / kSlack && population <= kSlack * kPopulationBound)
    return AdiabaticityGrade::Warn;
  return AdiabaticityGrade::Fail;
}

AdiabaticityReport adiabaticity_report(const CouplingSystem& system, const CVector& eigenvalues,
                                       const ReducedRates& rates) {
  AdiabaticityReport report;
  if (system.size() == 0) return report;
  if (eigenvalues.size() != system.size()) throw InvalidArgument("adiabaticity_report: eigenvalue count mismatch");
  const double scale = std::max({rates.kappa, rates.gamma_A, std::abs(rates.g_A)});
  report.min_abs_eigenvalue = eigenvalues.cwiseAbs().minCoeff();
  report.ratio = scale > 0.0 ? report.min_abs_eigenvalue / scale : std::numeric_limits<double>::infinity();
  try {
    report.one_photon_population = one_photon_population(system);
  } catch (const NumericalFailure&) {
    report.one_photon_population = std::numeric_limits<double>::infinity();
  }
  report.grade = grade_adiabaticity(report.min_abs_eigenvalue, scale, report.one_photon_population);
  return report;
}

AdiabaticityReport adiabaticity_report(const CouplingSystem& system, const ReducedRates& rates) {
  if (system.size() == 0) return {};
  return adiabaticity_report(system, eigenvalues(system), rates);
}

void write_matrix_csv(std::ostream& os, const CMatrix& matrix) {
  os << "# rows=" << matrix.rows() << " cols=" << matrix.cols() << " order=row-major values=re,im\n";
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j) os << ',';
      os << matrix(i, j).real() << ',' << matrix(i, j).imag();
    }
    os << '\n';
  }
}

CMatrix read_matrix_csv(std::istream& is) {
  std::string header;
  std::getline(is, header);
  Eigen::Index rows = -1, cols = -1;
  if (std::sscanf(header.c_str(), "# rows=%ld cols=%ld", &rows, &cols) != 2 || rows < 0 || cols < 0)
    throw InvalidArgument("matrix csv: bad header '" + header + "'");
  CMatrix m(rows, cols);
  std::string line;
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(is, line)) throw InvalidArgument("matrix csv: truncated");
    std::stringstream ss(line);
    std::string cell;
    for (Eigen::Index j = 0; j < cols; ++j) {
      double re = 0.0, im = 0.0;
      if (!std::getline(ss, cell, ',')) throw InvalidArgument("matrix csv: short row");
      re = std::stod(cell);
      if (!std::getline(ss, cell, ',')) throw InvalidArgument("matrix csv: short row");
      im = std::stod(cell);
      m(i, j) = {re, im};
    }
  }
  return m;
}

void dump_system(const std::string& prefix, const CouplingSystem& system, const ModeSet* modes) {
  auto write = [&](const std::string& name, const CMatrix& m) {
    std::ofstream out(prefix + name);
    if (!out) throw Error("cannot write " + prefix + name);
    write_matrix_csv(out, m);
  };
  write("M.csv", system.M);
  write("g.csv", system.g.cast<cplx>());
  write("v.csv", system.v);
  if (modes) write("eigenvalues.csv", modes->eigenvalues);
}

}  // namespace eqed
