#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hogsvd/hocsd.hpp"
#include "hogsvd/hogsvd.hpp"
#include "hogsvd/kernel.hpp"
#include "hogsvd/matrix.hpp"

namespace hogsvd {

/// Large-pi limit operator (1/N) sum_i (Q_i^T Q_i)^2.
Matrix t_tilde_infinity(const OrthoSet& set);

/// The same operator written through symmetrized pair products:
/// (1/N) I - (1/N) sum_{i<j} (G_i G_j + G_j G_i), G_i = Q_i^T Q_i.
Matrix t_tilde_infinity_jordan(const OrthoSet& set);

/// Small-pi limit operator: mean of the row-space projectors Q_i^+ Q_i.
Matrix t_tilde_zero(const OrthoSet& set, std::optional<double> rank_tol = std::nullopt);

/// count log-spaced values from lo to hi inclusive. Needs 0 < lo <= hi, count >= 2.
Vector make_log_grid(double lo, double hi, std::size_t count);

struct SweepPoint {
  double pi = 0.0;
  Vector taus;       ///< eigenvalues of T_pi, in tracked order
  Vector varsigmas;  ///< matching eigenvalues of S_pi
  Matrix z;          ///< tracked eigenvectors of T_pi
  Matrix v;          ///< R^T z with unit columns
  Vector overlap;    ///< |<z_k(previous point), z_k(this point)>|, 1 at the first point
  std::vector<bool> crossing;  ///< overlap below the crossing threshold
};

struct SweepEndpoint {
  Matrix matrix;   ///< limit operator
  SymEigResult eig;
  Matrix v;        ///< R^T z with unit columns
  std::vector<bool> simple;  ///< eigenvalue is separated from its neighbours
};

struct SweepResult {
  std::vector<SweepPoint> points;  ///< ascending pi
  SweepEndpoint zero;              ///< small-pi limit
  SweepEndpoint infinity;          ///< large-pi limit
};

inline constexpr double kCrossingOverlap = 0.7;

/// Eigensystems of T_pi and S_pi over the grid (sorted ascending first). Grid
/// points are computed independently (in parallel when enabled); eigenvector
/// columns are then matched point to point by greedy maximal |overlap| with ties
/// going to the lower index, and signs are flipped for positive overlap.
SweepResult pi_sweep(const MatrixSet& set, std::span<const double> grid, bool parallel = true);

/// Angle between tracked curve k at the first (at_infinity = false) or last grid
/// point and the best-matching simple eigenvector of the corresponding limit
/// operator. Empty optional when the best match is not simple.
std::optional<double> endpoint_angle(const SweepResult& sweep, std::size_t k, bool at_infinity);

/// Mean amplification quotient over block pairs i < j, with
/// R_i = Q_i^T Q_i + pi I:  (1/(N(N-1))) sum (z^T R_i z / z^T R_j z + z^T R_j z / z^T R_i z).
/// Equals 1 when all quotients are 1. Scale invariant in z.
double g_pi_value(const OrthoSet& set, std::span<const double> z);

/// Gradient of g_pi_value at z.
Vector g_pi_gradient(const OrthoSet& set, std::span<const double> z);

/// The same mean over the data matrices with D_i = A_i^T A_i + pi A^T A.
/// f_pi_value(set, pi, R^{-1} z) == g_pi_value(Q-blocks, z).
double f_pi_value(const MatrixSet& set, double pi, std::span<const double> v);

/// Largest principal angle (radians) between the column spaces of a and b.
/// pi/2 when their dimensions differ, 0 when both are empty.
double principal_angle(const Matrix& a, const Matrix& b);

struct InstanceSpec {
  std::size_t n = 5;
  std::size_t blocks = 3;
  std::size_t p_common = 0;
  std::vector<std::size_t> isolated_owners;  ///< 0-based block index per isolated column
  std::vector<std::size_t> rows;             ///< m_i; empty selects n + 2 for every block
  std::uint64_t seed = 0;
};

struct PlantedInstance {
  MatrixSet set;
  std::vector<Matrix> q;         ///< orthonormal blocks before the R mixing
  Matrix r;                      ///< mixing factor, A_i = Q_i R
  Matrix z;                      ///< planted right basis
  std::vector<Vector> sigmas;    ///< planted patterns, sigmas[i][k]
  std::vector<SubspaceLabel> labels;  ///< planted label per column of z
  std::vector<std::size_t> owners;    ///< owner block per column (isolated only)
};

/// Planted instance with p_common common columns (sigma 1/sqrt(N) everywhere),
/// isolated columns (1 on the owner, 0 elsewhere) and remaining columns with
/// random positive patterns on at least two blocks. The remaining patterns are
/// redrawn until all T_pi eigenvalues are well separated from each other and
/// from tau(P) for pi in {0.1, 0.5, 1, 2, 10}. Throws PreconditionError when
/// the requested structure does not fit the block sizes.
PlantedInstance synthesize_instance(const InstanceSpec& spec);

/// Instance with caller-supplied patterns (columns must have unit square sum).
/// Labels are left unclassified.
PlantedInstance synthesize_with_patterns(const std::vector<Vector>& sigmas,
                                         std::vector<std::size_t> rows, std::uint64_t seed);

}  // namespace hogsvd
