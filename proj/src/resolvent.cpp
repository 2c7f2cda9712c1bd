#include "eqed/resolvent.hpp"

#include <cmath>

#include "detail/lapack.hpp"
#include "eqed/error.hpp"

namespace eqed {

const char* to_string(ResolventMethod method) {
  switch (method) {
    case ResolventMethod::Direct: return "direct";
    case ResolventMethod::Modal: return "modal";
    case ResolventMethod::Hessenberg: return "hessenberg";
  }
  return "?";
}

ResolventMethod resolvent_method_from_string(const std::string& name) {
  if (name == "direct") return ResolventMethod::Direct;
  if (name == "modal") return ResolventMethod::Modal;
  if (name == "hessenberg") return ResolventMethod::Hessenberg;
  throw InvalidArgument("unknown resolvent method '" + name + "'");
}

DirectResolvent::DirectResolvent(CouplingSystem system, bool with_norms)
    : system_(std::move(system)), with_norms_(with_norms) {}

ResolventSample DirectResolvent::at(double delta) const {
  ResolventSample s;
  const Eigen::Index n = system_.size();
  if (n == 0) return s;
  CMatrix shifted = system_.M;
  shifted.diagonal().array() -= delta;
  Eigen::PartialPivLU<CMatrix> lu(shifted);
  if (!(lu.rcond() > 1e-14)) {
    s.valid = false;
    return s;
  }
  CMatrix rhs(n, 2);
  rhs.col(0) = system_.g.cast<cplx>();
  rhs.col(1) = system_.v;
  const CMatrix y = lu.solve(rhs);
  s.gg = (rhs.col(0).transpose() * y.col(0)).value();
  s.gv = (rhs.col(0).transpose() * y.col(1)).value();
  s.vv = (rhs.col(1).transpose() * y.col(1)).value();
  if (with_norms_) {
    s.norm_gg = y.col(0).squaredNorm();
    s.norm_vv = y.col(1).squaredNorm();
    s.cross_gv = y.col(0).dot(y.col(1));
  }
  return s;
}

ModalResolvent::ModalResolvent(const CouplingSystem& system, const ModeSet& modes, bool with_norms)
    : lambda_(modes.eigenvalues), with_norms_(with_norms) {
  if (modes.flagged) throw NumericalFailure("modal resolvent: mode set is flagged (" + modes.flag_reason + ")");
  if (modes.size() != system.size()) throw InvalidArgument("modal resolvent: mode set does not match system");
  a_ = modes.eigenvectors.transpose() * system.g.cast<cplx>();
  b_ = modes.eigenvectors.transpose() * system.v;
  if (with_norms_) gram_ = modes.eigenvectors.adjoint() * modes.eigenvectors;
}

ResolventSample ModalResolvent::at(double delta) const {
  ResolventSample s;
  const Eigen::Index n = lambda_.size();
  if (n == 0) return s;
  const CVector inv = (lambda_.array() - delta).inverse().matrix();
  if (!inv.allFinite()) {
    s.valid = false;
    return s;
  }
  const CVector ca = a_.cwiseProduct(inv);
  const CVector cb = b_.cwiseProduct(inv);
  s.gg = (a_.transpose() * ca).value();
  s.gv = (a_.transpose() * cb).value();
  s.vv = (b_.transpose() * cb).value();
  if (with_norms_) {
    const CVector ga = gram_ * ca;
    const CVector gb = gram_ * cb;
    s.norm_gg = ca.dot(ga).real();
    s.norm_vv = cb.dot(gb).real();
    s.cross_gv = ca.dot(gb);
  }
  return s;
}

HessenbergResolvent::HessenbergResolvent(const CouplingSystem& system) : n_(system.size()) {
  if (n_ == 0) return;
  CMatrix h, q;
  detail::hessenberg_reduce(system.M, h, q);
  h_ = h;
  const CVector gc = system.g.cast<cplx>();
  right_g_ = q.adjoint() * gc;
  right_v_ = q.adjoint() * system.v;
  left_g_ = q.transpose() * gc;
  left_v_ = q.transpose() * system.v;
  upper_.resize(static_cast<std::size_t>(n_ * (n_ + 1) / 2));
}

CVector HessenbergResolvent::eigenvalues() const { return detail::hessenberg_eigenvalues(h_); }

ResolventSample HessenbergResolvent::at(double delta) const {
  ResolventSample s;
  const Eigen::Index n = n_;
  if (n == 0) return s;

  // Gaussian elimination with partial pivoting on H - delta I. Only the
  // running pivot row is modified, so H itself stays untouched; the upper
  // factor is packed row by row into upper_.
  std::vector<cplx> work(h_.row(0).data(), h_.row(0).data() + n);
  std::vector<cplx> next(static_cast<std::size_t>(n));
  work[0] -= delta;
  cplx wg = right_g_(0), wv = right_v_(0);
  std::vector<cplx> ug(static_cast<std::size_t>(n)), uv(static_cast<std::size_t>(n));
  std::vector<std::size_t> row_start(static_cast<std::size_t>(n));
  std::size_t offset = 0;

  for (Eigen::Index k = 0; k < n; ++k) {
    // work holds row k of the partially eliminated matrix in columns k..n-1
    row_start[k] = offset;
    if (k == n - 1) {
      upper_[offset] = work[k];
      ug[k] = wg;
      uv[k] = wv;
      break;
    }
    const cplx* src = h_.row(k + 1).data();
    for (Eigen::Index j = k; j < n; ++j) next[j] = src[j];
    next[k + 1] -= delta;
    cplx ng = right_g_(k + 1), nv = right_v_(k + 1);
    if (std::abs(next[k]) > std::abs(work[k])) {
      for (Eigen::Index j = k; j < n; ++j) std::swap(work[j], next[j]);
      std::swap(wg, ng);
      std::swap(wv, nv);
    }
    if (work[k] == cplx(0.0, 0.0)) {
      s.valid = false;
      return s;
    }
    const cplx l = next[k] / work[k];
    for (Eigen::Index j = k; j < n; ++j) upper_[offset + static_cast<std::size_t>(j - k)] = work[j];
    ug[k] = wg;
    uv[k] = wv;
    offset += static_cast<std::size_t>(n - k);
    for (Eigen::Index j = k + 1; j < n; ++j) work[j] = next[j] - l * work[j];
    wg = ng - l * wg;
    wv = nv - l * wv;
  }

  double max_pivot = 0.0, min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    const cplx* row = &upper_[row_start[k]];
    cplx sg = ug[k], sv = uv[k];
    for (Eigen::Index j = k + 1; j < n; ++j) {
      sg -= row[j - k] * ug[j];
      sv -= row[j - k] * uv[j];
    }
    const double p = std::abs(row[0]);
    max_pivot = std::max(max_pivot, p);
    min_pivot = std::min(min_pivot, p);
    ug[k] = sg / row[0];
    uv[k] = sv / row[0];
  }
  if (!(min_pivot > 1e-14 * max_pivot)) {
    s.valid = false;
    return s;
  }

  const Eigen::Map<const CVector> yg(ug.data(), n), yv(uv.data(), n);
  s.gg = (left_g_.transpose() * yg).value();
  s.gv = (left_g_.transpose() * yv).value();
  s.vv = (left_v_.transpose() * yv).value();
  s.norm_gg = yg.squaredNorm();
  s.norm_vv = yv.squaredNorm();
  s.cross_gv = yg.dot(yv);
  return s;
}

std::unique_ptr<Resolvent> make_resolvent(const CouplingSystem& system, ResolventMethod method,
                                          const ModeSet* modes) {
  switch (method) {
    case ResolventMethod::Direct: return std::make_unique<DirectResolvent>(system);
    case ResolventMethod::Hessenberg: return std::make_unique<HessenbergResolvent>(system);
    case ResolventMethod::Modal:
      if (modes && !modes->flagged) return std::make_unique<ModalResolvent>(system, *modes);
      return std::make_unique<DirectResolvent>(system);
  }
  throw InvalidArgument("make_resolvent: unknown method");
}

}  // namespace eqed
