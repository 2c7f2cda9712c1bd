#pragma once

// Thin wrappers over the LAPACK routines Eigen does not expose.

#include "eqed/types.hpp"

namespace eqed::detail {

/// Eigenvalues (and right eigenvectors if `vectors` is non-null) of a general
/// complex matrix. Throws NumericalFailure on LAPACK error.
void general_eigen(const CMatrix& a, CVector& values, CMatrix* vectors);

/// a = q h q^dag with h upper Hessenberg and q unitary.
void hessenberg_reduce(const CMatrix& a, CMatrix& h, CMatrix& q);

/// Eigenvalues of an upper Hessenberg matrix.
CVector hessenberg_eigenvalues(const CMatrix& h);

}  // namespace eqed::detail
