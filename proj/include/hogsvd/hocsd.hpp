#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "hogsvd/kernel.hpp"
#include "hogsvd/matrix.hpp"

namespace hogsvd {

inline constexpr double kDefaultClassTol = 1e-6;

/// N >= 2 blocks Q_i (m_i x n) with sum_i Q_i^T Q_i = I, plus the weight pi > 0.
/// The orthogonality defect is checked on construction (limit 1e-8 * n).
class OrthoSet {
 public:
  OrthoSet(std::vector<Matrix> blocks, double pi);

  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  const Matrix& block(std::size_t i) const { return blocks_.at(i); }
  std::size_t size() const noexcept { return blocks_.size(); }
  std::size_t cols() const noexcept { return blocks_.front().cols(); }
  double pi() const noexcept { return pi_; }

  /// Same blocks, different weight. Skips the orthogonality re-check.
  OrthoSet with_pi(double pi) const;

  /// ||sum_i Q_i^T Q_i - I||_F.
  double orthogonality_defect() const;

 private:
  OrthoSet(std::vector<Matrix> blocks, double pi, bool validate);

  std::vector<Matrix> blocks_;
  double pi_;
};

enum class OperatorKind { t_pi, s_pi };

struct MeanOperator {
  Matrix matrix;
  double pi = 0.0;
  std::size_t blocks = 0;
  OperatorKind kind = OperatorKind::t_pi;
};

enum class SubspaceLabel { common, isolated, intermediate, unclassified };

std::string_view to_string(SubspaceLabel label) noexcept;

struct SubspaceEntry {
  SubspaceLabel label = SubspaceLabel::unclassified;
  /// Number of blocks whose generalized singular value is numerically zero.
  std::size_t null_blocks = 0;
  /// Distance of tau to the matched target (or to the nearest tau(P) when unclassified).
  double distance = 0.0;
};

struct SubspaceReport {
  std::vector<SubspaceEntry> entries;

  std::size_t count(SubspaceLabel label) const noexcept;
  std::vector<std::size_t> indices(SubspaceLabel label) const;
};

struct HocsdResult {
  Matrix z;                   ///< n x n orthonormal, columns ordered by ascending tau
  std::vector<Vector> sigmas; ///< sigmas[i][k]: norm of column k of Q_i Z
  std::vector<Matrix> u;      ///< u[i]: m_i x n, unit-norm columns
  Vector taus;                ///< eigenvalues of T_pi paired with the columns of z
  SubspaceReport labels;
  double pi = 0.0;
};

/// Smallest possible eigenvalue of T_pi, N / (1 + pi N).
double tau_min(std::size_t n_blocks, double pi);
/// Largest possible eigenvalue of T_pi, (pi N + N - 1) / (pi N (1 + pi)).
double tau_max(std::size_t n_blocks, double pi);
/// Eigenvalue carried by a direction in the kernel of exactly P blocks with equal
/// Rayleigh quotients on the others. tau_of_p(N, pi, 0) == tau_min and
/// tau_of_p(N, pi, N - 1) == tau_max.
double tau_of_p(std::size_t n_blocks, double pi, std::size_t p);

/// 1e-8 * sqrt(n): generalized singular values at or below this count as zero
/// in sigma patterns. Stored sigma is zeroed only when the drop also keeps the
/// factorization exact.
double free_column_tolerance(std::size_t n) noexcept;

/// T_pi = (1/N) sum_i (Q_i^T Q_i + pi I)^{-1}, symmetrized. The N inverses are
/// computed in parallel and summed in block order.
MeanOperator build_t_pi(const OrthoSet& set);

/// Eigensystem of T_pi, ascending. Inside each cluster of (numerically) equal
/// eigenvalues the basis is rotated to diagonalize sum_i c_i Z_g^T Q_i^T Q_i Z_g
/// with fixed, rationally independent weights c_i, so that a vector shared by the
/// blocks' right singular spaces is returned regardless of how the solver split
/// the cluster.
SymEigResult t_pi_eigensystem(const OrthoSet& set);

HocsdResult hocsd_factor(const OrthoSet& set, double class_tol = kDefaultClassTol);

/// Labels each eigenvector. A label needs both the eigenvalue within class_tol
/// of its target and a matching sigma pattern (tolerance sqrt(class_tol) on sigma
/// values, free_column_tolerance(n) for zeros).
SubspaceReport classify_subspaces(std::span<const double> taus, double pi, std::size_t n_blocks,
                                  const std::vector<Vector>& sigmas,
                                  double class_tol = kDefaultClassTol);

/// Common columns first, isolated columns last. Common left vectors are
/// re-orthonormalized and free left vectors are re-chosen orthogonal to the rest.
HocsdResult canonicalize_hocsd(const HocsdResult& result);

}  // namespace hogsvd
