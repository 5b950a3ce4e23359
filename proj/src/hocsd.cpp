#include "hogsvd/hocsd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "factor_detail.hpp"
#include "hogsvd/errors.hpp"
#include "hogsvd/parallel.hpp"

namespace hogsvd {
namespace {

// Normalized eigenvalue gap (relative to tau_max - tau_min) below which
// neighbouring eigenvalues of T_pi are treated as one cluster.
constexpr double kClusterGap = 1e-8;

std::vector<double> cluster_weights(std::size_t count) {
  // Square roots of distinct primes are linearly independent over the
  // rationals, so different sigma^2 patterns get different weighted sums.
  std::vector<double> w;
  for (std::size_t cand = 2; w.size() < count; ++cand) {
    bool prime = true;
    for (std::size_t d = 2; d * d <= cand; ++d)
      if (cand % d == 0) {
        prime = false;
        break;
      }
    if (prime) w.push_back(std::sqrt(static_cast<double>(cand)));
  }
  return w;
}

void require_valid_pi(double pi) {
  if (!(pi > 0.0) || !std::isfinite(pi)) {
    std::ostringstream msg;
    msg << "pi must be a finite positive number, got " << pi;
    throw DomainError(msg.str());
  }
}

}  // namespace

OrthoSet::OrthoSet(std::vector<Matrix> blocks, double pi) : OrthoSet(std::move(blocks), pi, true) {}

OrthoSet::OrthoSet(std::vector<Matrix> blocks, double pi, bool validate)
    : blocks_(std::move(blocks)), pi_(pi) {
  require_valid_pi(pi);
  if (!validate) return;
  if (blocks_.size() < 2) throw DimensionError("OrthoSet: need at least two blocks");
  const std::size_t n = blocks_.front().cols();
  if (n == 0) throw DimensionError("OrthoSet: blocks have no columns");
  for (const auto& q : blocks_) {
    if (q.cols() != n) throw DimensionError("OrthoSet: blocks have different column counts");
    require_finite(q, "OrthoSet block");
  }
  const double defect = orthogonality_defect();
  if (defect > 1e-8 * static_cast<double>(n)) {
    std::ostringstream msg;
    msg << "OrthoSet: ||sum Q_i^T Q_i - I||_F = " << defect << " exceeds " << 1e-8 * n;
    throw OrthogonalityError(msg.str(), defect);
  }
}

OrthoSet OrthoSet::with_pi(double pi) const { return OrthoSet(blocks_, pi, false); }

double OrthoSet::orthogonality_defect() const {
  const std::size_t n = cols();
  Matrix sum(n, n);
  for (const auto& q : blocks_) sum += gram(q);
  return frobenius_norm(sum - Matrix::identity(n));
}

std::string_view to_string(SubspaceLabel label) noexcept {
  switch (label) {
    case SubspaceLabel::common:
      return "common";
    case SubspaceLabel::isolated:
      return "isolated";
    case SubspaceLabel::intermediate:
      return "intermediate";
    case SubspaceLabel::unclassified:
      return "unclassified";
  }
  return "unclassified";
}

std::size_t SubspaceReport::count(SubspaceLabel label) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const SubspaceEntry& e) { return e.label == label; }));
}

std::vector<std::size_t> SubspaceReport::indices(SubspaceLabel label) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < entries.size(); ++k)
    if (entries[k].label == label) out.push_back(k);
  return out;
}

double tau_min(std::size_t n_blocks, double pi) {
  require_valid_pi(pi);
  const double n = static_cast<double>(n_blocks);
  return n / (1.0 + pi * n);
}

double tau_max(std::size_t n_blocks, double pi) {
  require_valid_pi(pi);
  const double n = static_cast<double>(n_blocks);
  return (pi * n + n - 1.0) / (pi * n * (1.0 + pi));
}

double tau_of_p(std::size_t n_blocks, double pi, std::size_t p) {
  require_valid_pi(pi);
  if (n_blocks == 0 || p + 1 > n_blocks) {
    std::ostringstream msg;
    msg << "tau_of_p: P = " << p << " outside [0, N-1] for N = " << n_blocks;
    throw DomainError(msg.str());
  }
  const double n = static_cast<double>(n_blocks);
  const double pp = static_cast<double>(p);
  return (pp * (1.0 - pi * n) + pi * n * n) / (pi * n * (1.0 + pi * (n - pp)));
}

double free_column_tolerance(std::size_t n) noexcept {
  return 1e-8 * std::sqrt(static_cast<double>(n));
}

MeanOperator build_t_pi(const OrthoSet& set) {
  const std::size_t nb = set.size();
  const std::size_t n = set.cols();
  std::vector<Matrix> inverses(nb);
  parallel::for_each_index(nb, [&](std::size_t i) {
    Matrix k = gram(set.block(i));
    for (std::size_t d = 0; d < n; ++d) k(d, d) += set.pi();
    inverses[i] = spd_inverse(k);
  });
  Matrix t(n, n);
  for (const auto& inv : inverses) t += inv;
  t = (1.0 / static_cast<double>(nb)) * t;
  return {symmetrized(t), set.pi(), nb, OperatorKind::t_pi};
}

SymEigResult t_pi_eigensystem(const OrthoSet& set) {
  const MeanOperator t = build_t_pi(set);
  SymEigResult eig = sym_eig(t.matrix);
  const std::size_t n = eig.eigenvalues.size();
  const double lo = tau_min(set.size(), set.pi());
  const double spread = tau_max(set.size(), set.pi()) - lo;
  const std::vector<double> weights = cluster_weights(set.size());

  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n &&
           (eig.eigenvalues[end] - eig.eigenvalues[end - 1]) / spread <= kClusterGap)
      ++end;
    if (end - start > 1) {
      std::vector<std::size_t> cols;
      for (std::size_t k = start; k < end; ++k) cols.push_back(k);
      const Matrix zg = select_columns(eig.eigenvectors, cols);
      Matrix mix(cols.size(), cols.size());
      for (std::size_t i = 0; i < set.size(); ++i) {
        mix += weights[i] * gram(set.block(i) * zg);
      }
      const Matrix rotated = zg * sym_eig(mix).eigenvectors;
      for (std::size_t c = 0; c < cols.size(); ++c)
        eig.eigenvectors.set_col(cols[c], rotated.col(c));
    }
    start = end;
  }
  return eig;
}

SubspaceReport classify_subspaces(std::span<const double> taus, double pi, std::size_t n_blocks,
                                  const std::vector<Vector>& sigmas, double class_tol) {
  require_valid_pi(pi);
  if (n_blocks < 2) throw DimensionError("classify_subspaces: need N >= 2");
  if (sigmas.size() != n_blocks) throw DimensionError("classify_subspaces: sigma block count");
  const std::size_t n = taus.size();
  for (const auto& s : sigmas)
    if (s.size() != n) throw DimensionError("classify_subspaces: sigma length mismatch");

  const double zero_tol = free_column_tolerance(n);
  const double pattern_tol = std::sqrt(class_tol);
  const double lo = tau_min(n_blocks, pi);
  const double hi = tau_max(n_blocks, pi);
  const double common_sigma = 1.0 / std::sqrt(static_cast<double>(n_blocks));

  SubspaceReport report;
  report.entries.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t zeros = 0;
    bool common_pattern = true;
    double largest = 0.0;
    for (std::size_t i = 0; i < n_blocks; ++i) {
      const double s = sigmas[i][k];
      if (s <= zero_tol) ++zeros;
      if (std::abs(s - common_sigma) > pattern_tol) common_pattern = false;
      largest = std::max(largest, s);
    }
    const bool isolated_pattern =
        zeros == n_blocks - 1 && std::abs(largest - 1.0) <= pattern_tol;

    SubspaceEntry& e = report.entries[k];
    e.null_blocks = zeros;
    const double d_common = std::abs(taus[k] - lo);
    const double d_isolated = std::abs(taus[k] - hi);
    if (d_common <= class_tol && common_pattern) {
      e.label = SubspaceLabel::common;
      e.distance = d_common;
    } else if (d_isolated <= class_tol && isolated_pattern) {
      e.label = SubspaceLabel::isolated;
      e.distance = d_isolated;
    } else if (zeros >= 1 && zeros + 2 <= n_blocks &&
               std::abs(taus[k] - tau_of_p(n_blocks, pi, zeros)) <= class_tol) {
      e.label = SubspaceLabel::intermediate;
      e.distance = std::abs(taus[k] - tau_of_p(n_blocks, pi, zeros));
    } else {
      e.label = SubspaceLabel::unclassified;
      e.distance = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < n_blocks; ++p)
        e.distance = std::min(e.distance, std::abs(taus[k] - tau_of_p(n_blocks, pi, p)));
    }
  }
  return report;
}

HocsdResult hocsd_factor(const OrthoSet& set, double class_tol) {
  SymEigResult eig = t_pi_eigensystem(set);
  const std::size_t nb = set.size();
  const std::size_t n = set.cols();

  HocsdResult out;
  out.pi = set.pi();
  out.z = std::move(eig.eigenvectors);
  out.taus = std::move(eig.eigenvalues);
  out.sigmas.resize(nb);
  out.u.resize(nb);
  // Dropping a column must also fit a tenth of the exactness budget 1e-9 * n.
  const double sn = std::sqrt(static_cast<double>(n));
  const Vector zero_tol(n, std::min(free_column_tolerance(n), 1e-10 * sn));
  parallel::for_each_index(nb, [&](std::size_t i) {
    detail::split_left_factor(set.block(i) * out.z, zero_tol, out.u[i], out.sigmas[i]);
  });
  out.labels = classify_subspaces(out.taus, set.pi(), nb, out.sigmas, class_tol);
  return out;
}

HocsdResult canonicalize_hocsd(const HocsdResult& result) {
  const auto order = detail::canonical_order(result.labels);
  HocsdResult out;
  out.pi = result.pi;
  out.z = permute_columns(result.z, order);
  out.taus = detail::permute(result.taus, order);
  out.labels = detail::permute(result.labels, order);
  for (const auto& s : result.sigmas) out.sigmas.push_back(detail::permute(s, order));
  for (const auto& u : result.u) out.u.push_back(permute_columns(u, order));
  detail::canonicalize_left_factors(out.u, out.sigmas, out.labels);
  return out;
}

}  // namespace hogsvd
