#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace eqed {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Cavity wavenumber in units of 1/lambda.
inline constexpr double kDefaultWavenumber = kTwoPi;

/// Emitters closer than this (in units of lambda) are rejected: the
/// near-field kernel diverges as 1/xi^3.
inline constexpr double kMinSeparation = 1e-6;

}  // namespace eqed
