#include "detail/lapack.hpp"

#include <complex>
#include <sstream>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "eqed/error.hpp"

namespace eqed::detail {
namespace {

void check(lapack_int info, const char* routine) {
  if (info != 0) {
    std::ostringstream os;
    os << routine << " failed with info=" << info;
    throw NumericalFailure(os.str());
  }
}

}  // namespace

void general_eigen(const CMatrix& a, CVector& values, CMatrix* vectors) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  CMatrix work = a;
  values.resize(n);
  if (n == 0) {
    if (vectors) vectors->resize(0, 0);
    return;
  }
  if (vectors) {
    vectors->resize(n, n);
    check(LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, values.data(), nullptr, n,
                        vectors->data(), n),
          "zgeev");
  } else {
    check(LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, values.data(), nullptr, n, nullptr, n),
          "zgeev");
  }
}

void hessenberg_reduce(const CMatrix& a, CMatrix& h, CMatrix& q) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  q = a;
  if (n == 0) {
    h.resize(0, 0);
    return;
  }
  CVector tau(std::max<lapack_int>(n - 1, 1));
  check(LAPACKE_zgehrd(LAPACK_COL_MAJOR, n, 1, n, q.data(), n, tau.data()), "zgehrd");
  h = CMatrix::Zero(n, n);
  for (lapack_int j = 0; j < n; ++j)
    for (lapack_int i = 0; i <= std::min(j + 1, n - 1); ++i) h(i, j) = q(i, j);
  check(LAPACKE_zunghr(LAPACK_COL_MAJOR, n, 1, n, q.data(), n, tau.data()), "zunghr");
}

CVector hessenberg_eigenvalues(const CMatrix& h) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  CVector w(n);
  if (n == 0) return w;
  CMatrix work = h;
  check(LAPACKE_zhseqr(LAPACK_COL_MAJOR, 'E', 'N', n, 1, n, work.data(), n, w.data(), nullptr, 1), "zhseqr");
  return w;
}

}  // namespace eqed::detail
