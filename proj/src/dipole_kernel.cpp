#include "eqed/dipole_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eqed/error.hpp"

namespace eqed {
namespace {

void check_separation(double r) {
  if (!(r >= kMinSeparation)) {
    std::ostringstream os;
    os << "dipole kernel: separation " << r << " lambda below " << kMinSeparation;
    throw KernelSingularity(os.str());
  }
}

}  // namespace

KernelGeometry KernelGeometry::from_separation(const Position3& separation, double wavenumber) {
  const double r = separation.norm();
  check_separation(r);
  const double c = std::clamp(separation.z / r, -1.0, 1.0);
  return {wavenumber * r, std::acos(c)};
}

NormalizedKernel normalized_kernel(double xi, double cos_theta) {
  const double c2 = cos_theta * cos_theta;
  const double s2 = 1.0 - c2;
  const double near = 3.0 * c2 - 1.0;
  const double sn = std::sin(xi);
  const double cs = std::cos(xi);
  const double xi2 = xi * xi;
  const double xi3 = xi2 * xi;

  NormalizedKernel out;
  out.g = -1.5 * (s2 * cs / xi + near * (cs / xi3 + sn / xi2));
  if (xi < kSeriesThreshold) {
    // sin(x)/x and (sin x - x cos x)/x^3 to O(x^10)
    const double far_term = 1.0 + xi2 * (-1.0 / 6 + xi2 * (1.0 / 120 + xi2 * (-1.0 / 5040 + xi2 / 362880)));
    const double near_term =
        1.0 / 3 + xi2 * (-1.0 / 30 + xi2 * (1.0 / 840 + xi2 * (-1.0 / 45360 + xi2 / 3991680)));
    out.f = 1.5 * (s2 * far_term + near * near_term);
  } else {
    out.f = 1.5 * (s2 * sn / xi + near * (sn - xi * cs) / xi3);
  }
  return out;
}

NormalizedKernel normalized_g_f(const Position3& separation, double gamma_i, double gamma_j, double wavenumber) {
  if (!(gamma_i >= 0.0) || !(gamma_j >= 0.0)) throw InvalidArgument("dipole kernel: decay rates must be >= 0");
  const double r = separation.norm();
  check_separation(r);
  return normalized_kernel(wavenumber * r, separation.z / r);
}

DipoleCoupling coupling_kernel(const Position3& separation, double gamma_i, double gamma_j, double wavenumber) {
  const auto gf = normalized_g_f(separation, gamma_i, gamma_j, wavenumber);
  const double scale = std::sqrt(gamma_i * gamma_j);
  return DipoleCoupling::from_kernel(scale * cplx(gf.g, -gf.f));
}

double cavity_coupling(const Position3& position, double g0, double wavenumber) {
  return g0 * std::cos(wavenumber * position.y);
}

}  // namespace eqed
