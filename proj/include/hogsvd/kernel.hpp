#pragma once

#include <cstddef>

#include "hogsvd/matrix.hpp"

// Dense primitives every decomposition in this library is built from.

namespace hogsvd {

struct QrResult {
  Matrix q;  ///< m x n, orthonormal columns
  Matrix r;  ///< n x n, upper triangular, nonnegative diagonal
};

struct SymEigResult {
  Vector eigenvalues;   ///< ascending
  Matrix eigenvectors;  ///< column k pairs with eigenvalues[k]
};

struct SvdResult {
  Matrix left;             ///< m x k orthonormal columns, k = min(m, n)
  Vector singular_values;  ///< descending, nonnegative
  Matrix right;            ///< n x k orthonormal columns
};

/// Householder thin QR of a matrix with rows >= cols. R's diagonal is made
/// nonnegative by flipping the matching column of Q.
QrResult thin_qr(const Matrix& a);

/// Cyclic Jacobi eigensolver for symmetric matrices. The input is symmetrized
/// as (M + M^T)/2; an asymmetry above 1e-10 * ||M||_F is a PreconditionError.
/// Sweeps stop once the off-diagonal Frobenius norm drops to 1e-14 * ||M||_F.
/// Ties keep the column order produced by the rotations.
SymEigResult sym_eig(const Matrix& m);

/// One-sided (Hestenes) Jacobi SVD, run on the taller orientation.
SvdResult svd(const Matrix& a);

/// Inverse of a symmetric positive definite matrix through its Cholesky factor.
Matrix spd_inverse(const Matrix& m);

/// Orthogonal projector Q^+ Q onto the row space of q. Singular values at or
/// below rank_tol * sigma_max are treated as zero.
Matrix row_space_projector(const Matrix& q, double rank_tol);

/// Orthonormal basis of the column space of a (columns of the returned matrix).
Matrix column_space_basis(const Matrix& a, double rank_tol);

/// n * machine epsilon.
double default_rank_tol(std::size_t n) noexcept;

/// Solves R X = B for upper-triangular R.
Matrix solve_upper(const Matrix& r, const Matrix& b);

/// Returns A R^{-1} for upper-triangular R (row-wise forward substitution).
Matrix right_divide_upper(const Matrix& a, const Matrix& r);

}  // namespace hogsvd
