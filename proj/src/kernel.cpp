#include "hogsvd/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hogsvd/errors.hpp"

namespace hogsvd {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxJacobiSweeps = 30;
constexpr int kMaxSvdSweeps = 75;

// Rotation (c, s) that diagonalizes [[app, apq], [apq, aqq]].
struct Rotation {
  double c;
  double s;
};

Rotation symmetric_schur(double app, double apq, double aqq) {
  const double theta = (aqq - app) / (2.0 * apq);
  double t;
  if (std::abs(theta) > 1e150) {
    t = 0.5 / theta;
  } else {
    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
  }
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  return {c, t * c};
}

// Completes `u` (m x k) so that columns flagged in `filled` == false become unit
// vectors orthogonal to the filled ones; standard basis candidates, first survivor wins.
void complete_orthonormal(Matrix& u, std::vector<bool>& filled) {
  const std::size_t m = u.rows();
  for (std::size_t k = 0; k < u.cols(); ++k) {
    if (filled[k]) continue;
    for (std::size_t cand = 0; cand < m; ++cand) {
      Vector r(m, 0.0);
      r[cand] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < u.cols(); ++j) {
          if (!filled[j]) continue;
          double proj = 0.0;
          for (std::size_t i = 0; i < m; ++i) proj += u(i, j) * r[i];
          for (std::size_t i = 0; i < m; ++i) r[i] -= proj * u(i, j);
        }
      }
      const double nr = norm2(r);
      if (nr > 1e-4) {
        for (std::size_t i = 0; i < m; ++i) u(i, k) = r[i] / nr;
        filled[k] = true;
        break;
      }
    }
  }
}

}  // namespace

double default_rank_tol(std::size_t n) noexcept { return static_cast<double>(n) * kEps; }

QrResult thin_qr(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) {
    std::ostringstream msg;
    msg << "thin_qr: needs rows >= cols, got " << m << "x" << n;
    throw DimensionError(msg.str());
  }
  require_finite(a, "thin_qr input");

  Matrix work = a;
  std::vector<Vector> reflectors(n);
  std::vector<double> betas(n, 0.0);

  for (std::size_t k = 0; k < n; ++k) {
    Vector v(m - k);
    for (std::size_t i = k; i < m; ++i) v[i - k] = work(i, k);
    const double alpha = norm2(v);
    if (alpha == 0.0) continue;
    // v = x + sign(x0) ||x|| e1 keeps the reflector well conditioned.
    const double sign = v[0] >= 0.0 ? 1.0 : -1.0;
    v[0] += sign * alpha;
    const double vnorm2 = dot(v, v);
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i - k] * work(i, j);
      s *= beta;
      for (std::size_t i = k; i < m; ++i) work(i, j) -= s * v[i - k];
    }
    for (std::size_t i = k + 1; i < m; ++i) work(i, k) = 0.0;
    reflectors[k] = std::move(v);
    betas[k] = beta;
  }

  // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of I, right to left.
  Matrix q(m, n);
  for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    if (betas[kk] == 0.0) continue;
    const Vector& v = reflectors[kk];
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = kk; i < m; ++i) s += v[i - kk] * q(i, j);
      s *= betas[kk];
      for (std::size_t i = kk; i < m; ++i) q(i, j) -= s * v[i - kk];
    }
  }

  Matrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) r(i, j) = work(i, j);

  for (std::size_t i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) {
      for (std::size_t j = i; j < n; ++j) r(i, j) = -r(i, j);
      for (std::size_t row = 0; row < m; ++row) q(row, i) = -q(row, i);
    }
  }
  return {std::move(q), std::move(r)};
}

SymEigResult sym_eig(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("sym_eig: matrix is not square");
  require_finite(m, "sym_eig input");
  const std::size_t n = m.rows();
  const double fro = frobenius_norm(m);
  if (frobenius_norm(m - m.transposed()) > 1e-10 * fro) {
    throw PreconditionError("sym_eig: matrix is not symmetric");
  }

  Matrix a = symmetrized(m);
  Matrix v = Matrix::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  const double threshold = 1e-14 * fro;
  bool converged = fro == 0.0;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    if (off_norm() <= threshold) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const auto [c, s] = symmetric_schur(a(p, p), apq, a(q, q));
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_norm() > threshold) {
    throw ConvergenceError("sym_eig: Jacobi sweeps did not converge");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SymEigResult out;
  out.eigenvalues.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.eigenvalues[k] = a(order[k], order[k]);
  out.eigenvectors = permute_columns(v, order);
  return out;
}

SvdResult svd(const Matrix& a) {
  require_finite(a, "svd input");
  if (a.rows() < a.cols()) {
    SvdResult t = svd(a.transposed());
    return {std::move(t.right), std::move(t.singular_values), std::move(t.left)};
  }
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix w = a;
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < kMaxSvdSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += w(i, p) * w(i, p);
          beta += w(i, q) * w(i, q);
          gamma += w(i, p) * w(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= kEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const auto [c, s] = symmetric_schur(alpha, gamma, beta);
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  Vector sigma(n);
  for (std::size_t k = 0; k < n; ++k) sigma[k] = column_norm(w, k);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  SvdResult out;
  out.singular_values.resize(n);
  out.left = Matrix(m, n);
  out.right = permute_columns(v, order);
  const double smax = n == 0 ? 0.0 : sigma[order[0]];
  const double zero_tol = static_cast<double>(std::max(m, n)) * kEps * smax;
  std::vector<bool> filled(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.singular_values[k] = sigma[src];
    if (sigma[src] > zero_tol && sigma[src] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.left(i, k) = w(i, src) / sigma[src];
      filled[k] = true;
    }
  }
  complete_orthonormal(out.left, filled);
  return out;
}

Matrix spd_inverse(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("spd_inverse: matrix is not square");
  require_finite(m, "spd_inverse input");
  const std::size_t n = m.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      std::ostringstream msg;
      msg << "spd_inverse: non-positive pivot " << d << " at column " << j;
      throw NotSpdError(msg.str());
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.5 * (m(i, j) + m(j, i));
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  // L^{-1} by forward substitution, then M^{-1} = L^{-T} L^{-1}.
  Matrix linv(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = col; i < n; ++i) {
      double s = i == col ? 1.0 : 0.0;
      for (std::size_t k = col; k < i; ++k) s -= l(i, k) * linv(k, col);
      linv(i, col) = s / l(i, i);
    }
  }
  return gram(linv);
}

Matrix row_space_projector(const Matrix& q, double rank_tol) {
  if (!(rank_tol > 0.0)) throw DomainError("row_space_projector: rank_tol must be positive");
  const std::size_t n = q.cols();
  Matrix p(n, n);
  if (q.rows() == 0 || n == 0) return p;
  const SvdResult s = svd(q);
  const double smax = s.singular_values.empty() ? 0.0 : s.singular_values.front();
  if (smax == 0.0) return p;
  for (std::size_t k = 0; k < s.singular_values.size(); ++k) {
    if (s.singular_values[k] <= rank_tol * smax) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) p(i, j) += s.right(i, k) * s.right(j, k);
  }
  return symmetrized(p);
}

Matrix column_space_basis(const Matrix& a, double rank_tol) {
  if (a.cols() == 0 || a.rows() == 0) return Matrix(a.rows(), 0);
  const SvdResult s = svd(a);
  const double smax = s.singular_values.empty() ? 0.0 : s.singular_values.front();
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < s.singular_values.size(); ++k)
    if (smax > 0.0 && s.singular_values[k] > rank_tol * smax) keep.push_back(k);
  return select_columns(s.left, keep);
}

Matrix solve_upper(const Matrix& r, const Matrix& b) {
  const std::size_t n = r.rows();
  if (r.cols() != n || b.rows() != n) throw DimensionError("solve_upper: shape mismatch");
  Matrix x(n, b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = n; i-- > 0;) {
      double s = b(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= r(i, k) * x(k, c);
      x(i, c) = s / r(i, i);
    }
  }
  return x;
}

Matrix right_divide_upper(const Matrix& a, const Matrix& r) {
  const std::size_t n = r.rows();
  if (r.cols() != n || a.cols() != n) throw DimensionError("right_divide_upper: shape mismatch");
  Matrix x(a.rows(), n);
  for (std::size_t row = 0; row < a.rows(); ++row) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = a(row, j);
      for (std::size_t k = 0; k < j; ++k) s -= x(row, k) * r(k, j);
      x(row, j) = s / r(j, j);
    }
  }
  return x;
}

}  // namespace hogsvd
