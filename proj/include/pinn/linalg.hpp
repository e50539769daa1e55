#pragma once

#include "pinn/types.hpp"

namespace pinn::linalg {

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Input symmetry is the caller's contract; only the lower
/// triangle is trusted. Deterministic (fixed sweep order).
Vec symmetric_eigenvalues(Mat a);

/// Spectral norm of a symmetric matrix (max |eigenvalue|).
double spectral_norm_sym(const Mat& a);

/// Solves a*x = b for symmetric positive definite a via an in-place
/// LL^T factorization (no explicit inverse).
Vec cholesky_solve(Mat a, Vec b);

}  // namespace pinn::linalg
