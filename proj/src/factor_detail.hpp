#pragma once

// Column bookkeeping shared by the HO-CSD and HO-GSVD factorizations.

#include <cstddef>
#include <span>
#include <vector>

#include "hogsvd/hocsd.hpp"
#include "hogsvd/matrix.hpp"

namespace hogsvd::detail {

/// Sets each column k in `fill_order` (all with sigma[k] == 0) of u to a unit
/// vector: standard basis candidates e_1, e_2, ... are orthogonalized against
/// the columns with sigma > 0 and the columns filled so far; the first
/// candidate that survives is normalized. Falls back to e_1 when the column
/// space is already full.
void fill_free_columns(Matrix& u, std::span<const double> sigma,
                       std::span<const std::size_t> fill_order);

/// Splits b = u * diag(sigma): sigma[k] = ||b_k|| (zeroed when at or below
/// zero_tol[k]), u_k = b_k / sigma[k], free columns filled in index order.
void split_left_factor(const Matrix& b, std::span<const double> zero_tol, Matrix& u,
                       Vector& sigma);

/// Stable permutation putting common columns first and isolated columns last.
std::vector<std::size_t> canonical_order(const SubspaceReport& labels);

Vector permute(const Vector& v, std::span<const std::size_t> order);
SubspaceReport permute(const SubspaceReport& r, std::span<const std::size_t> order);

/// Applies the canonical left-factor adjustments to factors already in
/// canonical column order: orthonormalize the common columns of each U_i and
/// re-choose free columns (isolated ones first) orthogonal to everything else.
void canonicalize_left_factors(std::vector<Matrix>& u, const std::vector<Vector>& sigmas,
                               const SubspaceReport& labels);

}  // namespace hogsvd::detail
