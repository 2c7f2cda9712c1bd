#pragma once

#include "eqed/geometry.hpp"
#include "eqed/types.hpp"

namespace eqed {

/// Complex dipole-dipole coupling between two z-oriented emitters.
/// `omega` is the coherent exchange rate, `gamma_cross` the correlated decay.
struct DipoleCoupling {
  cplx V;
  double omega = 0.0;        // Re V
  double gamma_cross = 0.0;  // -Im V

  static DipoleCoupling from_kernel(cplx v) { return {v, v.real(), -v.imag()}; }
};

/// xi = k |r|, theta = angle between r and the z axis.
struct KernelGeometry {
  double xi = 0.0;
  double theta = 0.0;

  static KernelGeometry from_separation(const Position3& separation, double wavenumber);
};

/// Rate-free shape functions: g = Omega / sqrt(gamma_i gamma_j),
/// f = gamma_cross / sqrt(gamma_i gamma_j).
struct NormalizedKernel {
  double g = 0.0;
  double f = 0.0;
};

/// Below this xi the dissipative part f is summed from its Taylor series.
inline constexpr double kSeriesThreshold = 0.05;

/// Shape functions at (xi, cos theta). xi must be positive.
NormalizedKernel normalized_kernel(double xi, double cos_theta);

/// Throws KernelSingularity when |separation| < kMinSeparation.
NormalizedKernel normalized_g_f(const Position3& separation, double gamma_i, double gamma_j,
                                double wavenumber = kDefaultWavenumber);

/// V = -(3 sqrt(gamma_i gamma_j) / 2) [sin^2 T e^{i xi}/xi
///       + (3 cos^2 T - 1)(e^{i xi}/xi^3 - i e^{i xi}/xi^2)].
DipoleCoupling coupling_kernel(const Position3& separation, double gamma_i, double gamma_j,
                               double wavenumber = kDefaultWavenumber);

/// Standing-wave cavity coupling g0 cos(k y); the sign is kept.
double cavity_coupling(const Position3& position, double g0, double wavenumber = kDefaultWavenumber);

}  // namespace eqed
