#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hogsvd/hocsd.hpp"
#include "hogsvd/matrix.hpp"

namespace hogsvd {

/// N >= 2 data matrices A_i (m_i x n) sharing the column count n, with labels.
class MatrixSet {
 public:
  explicit MatrixSet(std::vector<Matrix> blocks, std::vector<std::string> labels = {});

  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  const Matrix& block(std::size_t i) const { return blocks_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return blocks_.size(); }
  std::size_t cols() const noexcept { return blocks_.front().cols(); }
  std::size_t total_rows() const noexcept;
  Matrix stacked() const;

 private:
  std::vector<Matrix> blocks_;
  std::vector<std::string> labels_;
};

/// Thin QR of the stacked matrix, split back into row blocks: A_i = Q_i R.
struct QRStack {
  std::vector<Matrix> q;
  Matrix r;
  double sigma_min_r = 0.0;
  double sigma_max_r = 0.0;
  double rank_tol = 0.0;
  bool full_rank = false;

  double rank_ratio() const noexcept { return sigma_max_r > 0.0 ? sigma_min_r / sigma_max_r : 0.0; }
};

/// Throws RankDeficientError when sigma_min(R) <= rank_tol * sigma_max(R).
/// rank_tol defaults to n * machine epsilon.
QRStack stack_and_qr(const MatrixSet& set, std::optional<double> rank_tol = std::nullopt);

/// Same as stack_and_qr but reports rank deficiency through the flag only.
QRStack stack_and_qr_unchecked(const MatrixSet& set, std::optional<double> rank_tol = std::nullopt);

/// S_pi assembled literally from the pairwise quotients D_i D_j^{-1} with
/// D_i = A_i^T A_i + pi A^T A. Not symmetric in general.
MeanOperator build_s_pi_direct(const MatrixSet& set, double pi);

/// S_pi = R^T [((1 + pi N) T_pi - I) / (N - 1)] R^{-T}.
MeanOperator build_s_pi_via_t(const QRStack& qr, double pi);

inline double default_pi(std::size_t n_blocks) { return 1.0 / static_cast<double>(n_blocks); }

/// varsigma = ((1 + pi N) tau - 1) / (N - 1).
double varsigma_from_tau(double tau, double pi, std::size_t n_blocks);
/// Upper end of the S_pi spectrum, 1 + 1 / (pi N (1 + pi)).
double varsigma_max(std::size_t n_blocks, double pi);

struct HogsvdOptions {
  std::optional<double> pi;  ///< unset selects default_pi(N)
  bool normalize_v = false;
  double class_tol = kDefaultClassTol;
  std::optional<double> rank_tol;
};

struct HogsvdResult {
  Matrix v;                    ///< n x n, columns are eigenvectors of S_pi
  std::vector<Vector> sigmas;  ///< sigmas[i][k] = ||b_{i,k}||
  std::vector<Matrix> u;       ///< u[i]: m_i x n, unit-norm columns
  Vector varsigmas;            ///< eigenvalues of S_pi
  Vector taus;                 ///< matching eigenvalues of T_pi
  SubspaceReport labels;
  bool normalized_v = false;
  double pi = 0.0;
  Matrix z;                    ///< HO-CSD basis, v = R^T z before normalization
  Matrix r;                    ///< triangular factor of the stacked QR
  QRStack qr;
};

/// A_i = U_i Sigma_i V^T with V = R^T Z. B_i solves V B_i^T = A_i^T through the
/// known factors (B_i = (A_i R^{-1}) Z). With normalize_v each column of V is
/// scaled to unit norm and B_i, Sigma_i absorb the scale.
HogsvdResult hogsvd_factor(const MatrixSet& set, const HogsvdOptions& options);
HogsvdResult hogsvd_factor(const MatrixSet& set, double pi, bool normalize_v,
                           double class_tol = kDefaultClassTol);

/// Canonical column order (common first, isolated last) with orthonormal common
/// left vectors. Requires normalized_v == false.
HogsvdResult canonicalize_hogsvd(const HogsvdResult& result);

struct ResidualCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed() const noexcept { return value <= tolerance; }
};

enum class ReductionKind { svd, csd };

struct ReductionDiagnostics {
  ReductionKind kind = ReductionKind::svd;
  std::size_t target_block = 0;  ///< block whose SVD is recovered (svd kind)
  std::vector<ResidualCheck> checks;

  bool all_passed() const noexcept;
};

/// Checks the classical special cases:
///  - N - 1 identity blocks: the normalized-V factorization reproduces the SVD of
///    the remaining block (singular values and right singular subspaces);
///  - N = 2 with rank(A_1) = n: the Q-side factorization is a CS decomposition.
/// Throws ShapeMismatchError for any other input.
ReductionDiagnostics verify_reductions(const MatrixSet& set, double pi);

/// U diag(sigma) V^T.
Matrix reconstruct(const Matrix& u, std::span<const double> sigma, const Matrix& v);

/// ||A_i - U_i Sigma_i V^T||_F / ||A_i||_F per block (absolute when A_i = 0).
Vector reconstruction_residuals(const MatrixSet& set, const HogsvdResult& result);

/// Whether verify_reductions accepts the set.
bool has_reduction_shape(const MatrixSet& set);

}  // namespace hogsvd
