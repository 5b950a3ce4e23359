#include "hogsvd/hogsvd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "factor_detail.hpp"
#include "hogsvd/errors.hpp"
#include "hogsvd/kernel.hpp"
#include "hogsvd/parallel.hpp"

namespace hogsvd {
namespace {

constexpr double kReductionTol = 1e-8;

void require_valid_pi(double pi) {
  if (!(pi > 0.0) || !std::isfinite(pi)) {
    std::ostringstream msg;
    msg << "pi must be a finite positive number, got " << pi;
    throw DomainError(msg.str());
  }
}

bool is_identity(const Matrix& a) {
  if (a.rows() != a.cols()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j) != (i == j ? 1.0 : 0.0)) return false;
  return true;
}

bool has_full_column_rank(const Matrix& a) {
  if (a.rows() < a.cols()) return false;
  const SvdResult s = svd(a);
  const double smax = s.singular_values.front();
  return smax > 0.0 && s.singular_values.back() > default_rank_tol(a.cols()) * smax;
}

// ||W^T W - I||_F over the columns with nonzero sigma.
double active_orthonormality(const Matrix& u, std::span<const double> sigma) {
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < sigma.size(); ++k)
    if (sigma[k] > 0.0) active.push_back(k);
  const Matrix w = select_columns(u, active);
  return frobenius_norm(gram(w) - Matrix::identity(active.size()));
}

Matrix projector(const Matrix& basis) { return basis * basis.transposed(); }

ReductionDiagnostics svd_reduction(const MatrixSet& set, double pi, std::size_t target) {
  const std::size_t n = set.cols();
  const Matrix& aj = set.block(target);
  const HogsvdResult res = hogsvd_factor(set, pi, true);

  ReductionDiagnostics d;
  d.kind = ReductionKind::svd;
  d.target_block = target;

  const SvdResult ref = svd(aj);
  Vector expected = ref.singular_values;
  expected.resize(n, 0.0);
  Vector got = res.sigmas[target];
  std::sort(got.begin(), got.end(), std::greater<>());
  const double scale = std::max(1.0, expected.front());
  double sv_err = 0.0;
  for (std::size_t k = 0; k < n; ++k) sv_err = std::max(sv_err, std::abs(got[k] - expected[k]));
  d.checks.push_back({"singular_values", sv_err / scale, kReductionTol});

  // Right singular subspaces, compared cluster by cluster so that repeated
  // singular values may come back in any basis.
  const double cluster_tol = 1e-6 * scale;
  std::vector<std::pair<double, std::vector<std::size_t>>> clusters;  // value, svd columns
  for (std::size_t k = 0; k < ref.singular_values.size(); ++k) {
    const double s = ref.singular_values[k];
    if (s <= cluster_tol) continue;
    if (!clusters.empty() && std::abs(clusters.back().first - s) <= cluster_tol) {
      clusters.back().second.push_back(k);
    } else {
      clusters.push_back({s, {k}});
    }
  }
  std::vector<Matrix> ref_proj;
  Matrix nonzero_sum(n, n);
  for (const auto& c : clusters) {
    ref_proj.push_back(projector(select_columns(ref.right, c.second)));
    nonzero_sum += ref_proj.back();
  }
  const Matrix zero_proj = Matrix::identity(n) - nonzero_sum;

  std::vector<std::vector<std::size_t>> assigned(clusters.size() + 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = res.sigmas[target][k];
    std::size_t best = clusters.size();
    double best_dist = std::abs(s);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const double dist = std::abs(s - clusters[c].first);
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    assigned[best].push_back(k);
  }
  double vec_err = 0.0;
  for (std::size_t c = 0; c <= clusters.size(); ++c) {
    const Matrix& want = c < clusters.size() ? ref_proj[c] : zero_proj;
    const Matrix cols = select_columns(res.v, assigned[c]);
    const Matrix have = assigned[c].empty()
                            ? Matrix(n, n)
                            : projector(column_space_basis(cols, default_rank_tol(n) * 1e3));
    vec_err = std::max(vec_err, frobenius_norm(have - want));
  }
  d.checks.push_back({"right_vectors", vec_err, kReductionTol});
  d.checks.push_back(
      {"v_orthonormality", frobenius_norm(gram(res.v) - Matrix::identity(n)), kReductionTol});
  d.checks.push_back(
      {"u_orthonormality", active_orthonormality(res.u[target], res.sigmas[target]), kReductionTol});
  return d;
}

ReductionDiagnostics csd_reduction(const MatrixSet& set, double pi) {
  ReductionDiagnostics d;
  d.kind = ReductionKind::csd;
  d.target_block = 0;
  const QRStack qr = stack_and_qr(set);
  const HocsdResult csd = hocsd_factor(OrthoSet(qr.q, pi));
  const std::size_t n = set.cols();

  double id = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = csd.sigmas[0][k] * csd.sigmas[0][k] + csd.sigmas[1][k] * csd.sigmas[1][k] - 1.0;
    id += e * e;
  }
  d.checks.push_back({"cs_identity", std::sqrt(id), kReductionTol});
  d.checks.push_back({"u1_orthonormality", active_orthonormality(csd.u[0], csd.sigmas[0]), kReductionTol});
  d.checks.push_back({"u2_orthonormality", active_orthonormality(csd.u[1], csd.sigmas[1]), kReductionTol});

  const HogsvdResult g = hogsvd_factor(set, pi, false);
  const Vector rec = reconstruction_residuals(set, g);
  d.checks.push_back({"gsvd_reconstruction", *std::max_element(rec.begin(), rec.end()), kReductionTol});
  return d;
}

}  // namespace

MatrixSet::MatrixSet(std::vector<Matrix> blocks, std::vector<std::string> labels)
    : blocks_(std::move(blocks)), labels_(std::move(labels)) {
  if (blocks_.size() < 2) throw DimensionError("MatrixSet: need at least two matrices");
  const std::size_t n = blocks_.front().cols();
  if (n == 0) throw DimensionError("MatrixSet: matrices have no columns");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].cols() != n) {
      std::ostringstream msg;
      msg << "MatrixSet: matrix " << i + 1 << " has " << blocks_[i].cols()
          << " columns, expected " << n;
      throw DimensionError(msg.str());
    }
    require_finite(blocks_[i], "MatrixSet block");
  }
  if (total_rows() < n) throw DimensionError("MatrixSet: stacked matrix has fewer rows than columns");
  if (labels_.empty()) {
    for (std::size_t i = 0; i < blocks_.size(); ++i) labels_.push_back("A" + std::to_string(i + 1));
  } else if (labels_.size() != blocks_.size()) {
    throw DimensionError("MatrixSet: label count differs from matrix count");
  }
}

std::size_t MatrixSet::total_rows() const noexcept {
  std::size_t m = 0;
  for (const auto& b : blocks_) m += b.rows();
  return m;
}

Matrix MatrixSet::stacked() const { return vstack(blocks_); }

QRStack stack_and_qr_unchecked(const MatrixSet& set, std::optional<double> rank_tol) {
  const std::size_t n = set.cols();
  QrResult f = thin_qr(set.stacked());
  QRStack out;
  std::size_t offset = 0;
  for (const auto& b : set.blocks()) {
    Matrix qi(b.rows(), n);
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < n; ++j) qi(i, j) = f.q(offset + i, j);
    offset += b.rows();
    out.q.push_back(std::move(qi));
  }
  const SvdResult s = svd(f.r);
  out.r = std::move(f.r);
  out.sigma_max_r = s.singular_values.front();
  out.sigma_min_r = s.singular_values.back();
  out.rank_tol = rank_tol.value_or(default_rank_tol(n));
  out.full_rank = out.sigma_max_r > 0.0 && out.sigma_min_r > out.rank_tol * out.sigma_max_r;
  return out;
}

QRStack stack_and_qr(const MatrixSet& set, std::optional<double> rank_tol) {
  QRStack out = stack_and_qr_unchecked(set, rank_tol);
  if (!out.full_rank) {
    std::ostringstream msg;
    msg << "stacked matrix is column-rank deficient: sigma_min(R)/sigma_max(R) = "
        << out.rank_ratio() << " (sigma_min = " << out.sigma_min_r
        << ", sigma_max = " << out.sigma_max_r << ", rank_tol = " << out.rank_tol << ")";
    throw RankDeficientError(msg.str(), out.sigma_min_r, out.sigma_max_r);
  }
  return out;
}

MeanOperator build_s_pi_direct(const MatrixSet& set, double pi) {
  require_valid_pi(pi);
  stack_and_qr(set);
  const std::size_t nb = set.size();
  const std::size_t n = set.cols();
  const Matrix g = gram(set.stacked());

  std::vector<Matrix> d(nb), dinv(nb);
  parallel::for_each_index(nb, [&](std::size_t i) {
    d[i] = gram(set.block(i)) + pi * g;
    dinv[i] = spd_inverse(d[i]);
  });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = i + 1; j < nb; ++j) pairs.emplace_back(i, j);
  std::vector<Matrix> terms(pairs.size());
  parallel::for_each_index(pairs.size(), [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    terms[p] = d[i] * dinv[j] + d[j] * dinv[i];
  });

  Matrix s(n, n);
  for (const auto& t : terms) s += t;
  const double nn = static_cast<double>(nb);
  return {(1.0 / (nn * (nn - 1.0))) * s, pi, nb, OperatorKind::s_pi};
}

MeanOperator build_s_pi_via_t(const QRStack& qr, double pi) {
  require_valid_pi(pi);
  if (!qr.full_rank) {
    throw RankDeficientError("build_s_pi_via_t: stacked matrix is column-rank deficient",
                             qr.sigma_min_r, qr.sigma_max_r);
  }
  const std::size_t nb = qr.q.size();
  const std::size_t n = qr.r.rows();
  const double nn = static_cast<double>(nb);
  const MeanOperator t = build_t_pi(OrthoSet(qr.q, pi));
  const Matrix m = (1.0 / (nn - 1.0)) * ((1.0 + pi * nn) * t.matrix - Matrix::identity(n));
  const Matrix y = solve_upper(qr.r, m.transposed()).transposed();  // M R^{-T}
  return {transpose_times(qr.r, y), pi, nb, OperatorKind::s_pi};
}

double varsigma_from_tau(double tau, double pi, std::size_t n_blocks) {
  const double nn = static_cast<double>(n_blocks);
  return ((1.0 + pi * nn) * tau - 1.0) / (nn - 1.0);
}

double varsigma_max(std::size_t n_blocks, double pi) {
  require_valid_pi(pi);
  const double nn = static_cast<double>(n_blocks);
  return 1.0 + 1.0 / (pi * nn * (1.0 + pi));
}

HogsvdResult hogsvd_factor(const MatrixSet& set, const HogsvdOptions& options) {
  const std::size_t nb = set.size();
  const std::size_t n = set.cols();
  const double pi = options.pi.value_or(default_pi(nb));
  require_valid_pi(pi);

  HogsvdResult out;
  out.qr = stack_and_qr(set, options.rank_tol);
  const HocsdResult csd = hocsd_factor(OrthoSet(out.qr.q, pi), options.class_tol);

  out.pi = pi;
  out.normalized_v = options.normalize_v;
  out.z = csd.z;
  out.r = out.qr.r;
  out.taus = csd.taus;
  out.labels = csd.labels;
  out.varsigmas.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.varsigmas[k] = varsigma_from_tau(csd.taus[k], pi, nb);

  out.v = transpose_times(out.r, out.z);
  Vector scale(n, 1.0);
  if (options.normalize_v) {
    for (std::size_t k = 0; k < n; ++k) {
      scale[k] = column_norm(out.v, k);
      for (std::size_t i = 0; i < n; ++i) out.v(i, k) /= scale[k];
    }
  }
  // A zeroed column drops sigma * ||v_k|| from A_i, so the free-column cut is
  // also capped at a tenth of the relative exactness budget 1e-8 * ||A_i||_F.
  const double sn = std::sqrt(static_cast<double>(n));
  Vector v_norm(n);
  for (std::size_t k = 0; k < n; ++k) v_norm[k] = column_norm(out.v, k);

  out.sigmas.resize(nb);
  out.u.resize(nb);
  parallel::for_each_index(nb, [&](std::size_t i) {
    Matrix b = right_divide_upper(set.block(i), out.r) * out.z;
    for (std::size_t row = 0; row < b.rows(); ++row)
      for (std::size_t k = 0; k < n; ++k) b(row, k) *= scale[k];
    const double a_norm = frobenius_norm(set.block(i));
    Vector zero_tol(n);
    for (std::size_t k = 0; k < n; ++k)
      zero_tol[k] = std::min(free_column_tolerance(n) * scale[k], 1e-9 * a_norm / (sn * v_norm[k]));
    detail::split_left_factor(b, zero_tol, out.u[i], out.sigmas[i]);
  });
  return out;
}

HogsvdResult hogsvd_factor(const MatrixSet& set, double pi, bool normalize_v, double class_tol) {
  require_valid_pi(pi);
  HogsvdOptions opts;
  opts.pi = pi;
  opts.normalize_v = normalize_v;
  opts.class_tol = class_tol;
  return hogsvd_factor(set, opts);
}

HogsvdResult canonicalize_hogsvd(const HogsvdResult& result) {
  if (result.normalized_v) {
    throw PreconditionError("canonicalize_hogsvd: canonical block values assume V = R^T Z (normalize_v = false)");
  }
  const auto order = detail::canonical_order(result.labels);
  HogsvdResult out = result;
  out.v = permute_columns(result.v, order);
  out.z = permute_columns(result.z, order);
  out.taus = detail::permute(result.taus, order);
  out.varsigmas = detail::permute(result.varsigmas, order);
  out.labels = detail::permute(result.labels, order);
  for (std::size_t i = 0; i < result.sigmas.size(); ++i) {
    out.sigmas[i] = detail::permute(result.sigmas[i], order);
    out.u[i] = permute_columns(result.u[i], order);
  }
  detail::canonicalize_left_factors(out.u, out.sigmas, out.labels);
  return out;
}

Matrix reconstruct(const Matrix& u, std::span<const double> sigma, const Matrix& v) {
  Matrix us = u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t k = 0; k < us.cols(); ++k) us(i, k) *= sigma[k];
  return us * v.transposed();
}

Vector reconstruction_residuals(const MatrixSet& set, const HogsvdResult& result) {
  Vector out(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double err = frobenius_norm(set.block(i) - reconstruct(result.u[i], result.sigmas[i], result.v));
    const double scale = frobenius_norm(set.block(i));
    out[i] = scale > 0.0 ? err / scale : err;
  }
  return out;
}

bool ReductionDiagnostics::all_passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const ResidualCheck& c) { return c.passed(); });
}

bool has_reduction_shape(const MatrixSet& set) {
  std::size_t identities = 0;
  for (const auto& b : set.blocks()) identities += is_identity(b) ? 1 : 0;
  if (identities + 1 >= set.size()) return true;
  return set.size() == 2 && has_full_column_rank(set.block(0));
}

ReductionDiagnostics verify_reductions(const MatrixSet& set, double pi) {
  require_valid_pi(pi);
  std::size_t identities = 0;
  std::size_t target = 0;
  bool target_found = false;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (is_identity(set.block(i))) {
      ++identities;
    } else if (!target_found) {
      target = i;
      target_found = true;
    }
  }
  if (identities + 1 >= set.size()) return svd_reduction(set, pi, target);
  if (set.size() == 2 && has_full_column_rank(set.block(0))) return csd_reduction(set, pi);
  throw ShapeMismatchError(
      "verify_reductions: input is neither N-1 identity blocks plus one matrix nor N = 2 with "
      "rank(A_1) = n");
}

}  // namespace hogsvd
