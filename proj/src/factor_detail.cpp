#include "factor_detail.hpp"

#include <cmath>

namespace hogsvd::detail {
namespace {

constexpr double kSurvivorNorm = 1e-4;

// Projects r onto the orthogonal complement of span(basis), two passes.
void orthogonalize(Vector& r, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& w : basis) {
      const double p = dot(w, r);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= p * w[i];
    }
  }
}

}  // namespace

void fill_free_columns(Matrix& u, std::span<const double> sigma,
                       std::span<const std::size_t> fill_order) {
  const std::size_t m = u.rows();
  if (m == 0 || fill_order.empty()) return;

  std::vector<Vector> basis;
  for (std::size_t k = 0; k < u.cols(); ++k) {
    if (sigma[k] == 0.0) continue;
    Vector r = u.col(k);
    orthogonalize(r, basis);
    const double nr = norm2(r);
    if (nr > 1e-10) {
      for (double& x : r) x /= nr;
      basis.push_back(std::move(r));
    }
  }

  for (std::size_t k : fill_order) {
    Vector chosen;
    for (std::size_t cand = 0; cand < m && chosen.empty(); ++cand) {
      Vector r(m, 0.0);
      r[cand] = 1.0;
      orthogonalize(r, basis);
      const double nr = norm2(r);
      if (nr > kSurvivorNorm) {
        for (double& x : r) x /= nr;
        chosen = std::move(r);
      }
    }
    if (chosen.empty()) {
      chosen.assign(m, 0.0);
      chosen[0] = 1.0;
    } else {
      basis.push_back(chosen);
    }
    u.set_col(k, chosen);
  }
}

void split_left_factor(const Matrix& b, std::span<const double> zero_tol, Matrix& u,
                       Vector& sigma) {
  const std::size_t n = b.cols();
  u = Matrix(b.rows(), n);
  sigma.assign(n, 0.0);
  std::vector<std::size_t> free;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = column_norm(b, k);
    if (s <= zero_tol[k] || s == 0.0) {
      free.push_back(k);
      continue;
    }
    sigma[k] = s;
    for (std::size_t i = 0; i < b.rows(); ++i) u(i, k) = b(i, k) / s;
  }
  fill_free_columns(u, sigma, free);
}

std::vector<std::size_t> canonical_order(const SubspaceReport& labels) {
  std::vector<std::size_t> order;
  const auto& e = labels.entries;
  for (std::size_t k = 0; k < e.size(); ++k)
    if (e[k].label == SubspaceLabel::common) order.push_back(k);
  for (std::size_t k = 0; k < e.size(); ++k)
    if (e[k].label != SubspaceLabel::common && e[k].label != SubspaceLabel::isolated)
      order.push_back(k);
  for (std::size_t k = 0; k < e.size(); ++k)
    if (e[k].label == SubspaceLabel::isolated) order.push_back(k);
  return order;
}

Vector permute(const Vector& v, std::span<const std::size_t> order) {
  Vector out(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) out[k] = v[order[k]];
  return out;
}

SubspaceReport permute(const SubspaceReport& r, std::span<const std::size_t> order) {
  SubspaceReport out;
  out.entries.reserve(order.size());
  for (std::size_t k : order) out.entries.push_back(r.entries[k]);
  return out;
}

void canonicalize_left_factors(std::vector<Matrix>& u, const std::vector<Vector>& sigmas,
                               const SubspaceReport& labels) {
  const std::size_t n = labels.entries.size();
  for (std::size_t i = 0; i < u.size(); ++i) {
    Matrix& ui = u[i];
    const Vector& si = sigmas[i];

    // Modified Gram-Schmidt over the common block.
    std::vector<std::size_t> common;
    for (std::size_t k = 0; k < n; ++k)
      if (labels.entries[k].label == SubspaceLabel::common && si[k] > 0.0) common.push_back(k);
    for (std::size_t a = 0; a < common.size(); ++a) {
      Vector col = ui.col(common[a]);
      for (std::size_t b = 0; b < a; ++b) {
        const Vector prev = ui.col(common[b]);
        const double p = dot(prev, col);
        for (std::size_t r = 0; r < col.size(); ++r) col[r] -= p * prev[r];
      }
      const double nc = norm2(col);
      if (nc > 0.0) {
        for (double& x : col) x /= nc;
        ui.set_col(common[a], col);
      }
    }

    std::vector<std::size_t> fill;
    for (std::size_t k = 0; k < n; ++k)
      if (si[k] == 0.0 && labels.entries[k].label == SubspaceLabel::isolated) fill.push_back(k);
    for (std::size_t k = 0; k < n; ++k)
      if (si[k] == 0.0 && labels.entries[k].label != SubspaceLabel::isolated) fill.push_back(k);
    fill_free_columns(ui, si, fill);
  }
}

}  // namespace hogsvd::detail
