#pragma once

#include <memory>
#include <string>
#include <vector>

#include "eqed/ensemble_matrix.hpp"

namespace eqed {

/// Bilinear forms of (M - delta I)^{-1} needed by the reduced model, plus
/// the norms entering the ensemble population estimate.
struct ResolventSample {
  cplx gg{0.0, 0.0};  // g^T (M - delta)^{-1} g
  cplx gv{0.0, 0.0};  // g^T (M - delta)^{-1} v
  cplx vv{0.0, 0.0};  // v^T (M - delta)^{-1} v
  double norm_gg = 0.0;   // |(M - delta)^{-1} g|^2
  double norm_vv = 0.0;   // |(M - delta)^{-1} v|^2
  cplx cross_gv{0.0, 0.0};  // ((M - delta)^{-1} g)^dag (M - delta)^{-1} v
  bool valid = true;
};

enum class ResolventMethod {
  Direct,      // LU of M - delta I at every point
  Modal,       // diagonalize once, shift eigenvalues
  Hessenberg,  // reduce to Hessenberg form once, O(N^2) per point
};

const char* to_string(ResolventMethod method);
ResolventMethod resolvent_method_from_string(const std::string& name);

class Resolvent {
 public:
  virtual ~Resolvent() = default;
  /// `delta` is measured from the frame the system was assembled in.
  virtual ResolventSample at(double delta) const = 0;
  virtual ResolventMethod method() const = 0;
};

class DirectResolvent final : public Resolvent {
 public:
  explicit DirectResolvent(CouplingSystem system, bool with_norms = true);
  ResolventSample at(double delta) const override;
  ResolventMethod method() const override { return ResolventMethod::Direct; }

 private:
  CouplingSystem system_;
  bool with_norms_;
};

/// Eigen-shift evaluation: sum_eta (g^T x)(x^T v) / (lambda_eta - delta).
/// Requires an unflagged ModeSet.
class ModalResolvent final : public Resolvent {
 public:
  ModalResolvent(const CouplingSystem& system, const ModeSet& modes, bool with_norms = true);
  ResolventSample at(double delta) const override;
  ResolventMethod method() const override { return ResolventMethod::Modal; }

 private:
  CVector lambda_;
  CVector a_;  // X^T g
  CVector b_;  // X^T v
  CMatrix gram_;  // X^dag X, only when norms are requested
  bool with_norms_;
};

/// M = Q H Q^dag with H upper Hessenberg; each point costs one O(N^2)
/// Hessenberg solve. Not safe for concurrent calls to at().
class HessenbergResolvent final : public Resolvent {
 public:
  explicit HessenbergResolvent(const CouplingSystem& system);
  ResolventSample at(double delta) const override;
  ResolventMethod method() const override { return ResolventMethod::Hessenberg; }

  /// Eigenvalues of M from the stored Hessenberg form.
  CVector eigenvalues() const;

 private:
  Eigen::Index n_ = 0;
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> h_;
  CVector right_g_, right_v_;  // Q^dag g, Q^dag v
  CVector left_g_, left_v_;    // Q^T g, Q^T v
  mutable std::vector<cplx> upper_;
};

/// Builds the requested resolvent. Modal falls back to Direct when `modes`
/// is null or flagged.
std::unique_ptr<Resolvent> make_resolvent(const CouplingSystem& system, ResolventMethod method,
                                          const ModeSet* modes = nullptr);

}  // namespace eqed
