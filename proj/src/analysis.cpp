#include "hogsvd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "hogsvd/errors.hpp"
#include "hogsvd/parallel.hpp"

namespace hogsvd {
namespace {

// Relative gap below which neighbouring limit eigenvalues count as one.
constexpr double kSimpleGap = 1e-6;

// Planted patterns are redrawn until eigenvalues are this far apart (relative
// to the spread tau_max - tau_min) at every probe weight.
constexpr double kPlantedGap = 1e-4;
constexpr double kPlantedProbes[] = {0.1, 0.5, 1.0, 2.0, 10.0};
constexpr double kMaxCondition = 100.0;

void require_valid_pi(double pi) {
  if (!(pi > 0.0) || !std::isfinite(pi)) throw DomainError("pi must be a finite positive number");
}

Matrix normalized_columns(Matrix m) {
  for (std::size_t k = 0; k < m.cols(); ++k) {
    const double s = column_norm(m, k);
    if (s > 0.0)
      for (std::size_t i = 0; i < m.rows(); ++i) m(i, k) /= s;
  }
  return m;
}

std::vector<bool> simple_flags(const Vector& values) {
  const std::size_t n = values.size();
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  scale = std::max(scale, std::numeric_limits<double>::min());
  std::vector<bool> out(n, true);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (values[k + 1] - values[k] <= kSimpleGap * scale) out[k] = out[k + 1] = false;
  }
  return out;
}

SweepEndpoint make_endpoint(Matrix op, const Matrix& r) {
  SweepEndpoint e;
  e.eig = sym_eig(op);
  e.matrix = std::move(op);
  e.v = normalized_columns(transpose_times(r, e.eig.eigenvectors));
  e.simple = simple_flags(e.eig.eigenvalues);
  return e;
}

// Half-chord form, accurate for small angles.
double vector_angle(std::span<const double> a, std::span<const double> b) {
  const double na = norm2(a);
  const double nb = norm2(b);
  const double sgn = dot(a, b) < 0.0 ? -1.0 : 1.0;
  Vector diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] / na - sgn * b[i] / nb;
  return 2.0 * std::asin(std::min(1.0, norm2(diff) / 2.0));
}

Vector quadratic_forms(const OrthoSet& set, std::span<const double> z, std::vector<Vector>* images) {
  const std::size_t nb = set.size();
  if (z.size() != set.cols()) throw DimensionError("g_pi: vector length differs from n");
  if (norm2(z) == 0.0) throw DomainError("g_pi: z must be nonzero");
  Vector forms(nb);
  if (images) images->resize(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const Vector qz = set.block(i) * z;
    Vector rz = transpose_times(set.block(i), qz);
    for (std::size_t k = 0; k < rz.size(); ++k) rz[k] += set.pi() * z[k];
    forms[i] = dot(z, rz);
    if (images) (*images)[i] = std::move(rz);
  }
  return forms;
}

double pair_mean(const Vector& forms) {
  const std::size_t nb = forms.size();
  double s = 0.0;
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = i + 1; j < nb; ++j) s += forms[i] / forms[j] + forms[j] / forms[i];
  const double nn = static_cast<double>(nb);
  return s / (nn * (nn - 1.0));
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix m(rows, cols);
  for (double& x : m.data()) x = gauss(rng);
  return m;
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  if (cols == 0) return Matrix(rows, 0);
  return thin_qr(random_matrix(rows, cols, rng)).q;
}

Matrix random_mixing(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> diag(1.0, 3.0);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Matrix r(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      r(i, i) = diag(rng);
      for (std::size_t j = i + 1; j < n; ++j) r(i, j) = off(rng);
    }
    const SvdResult s = svd(r);
    if (s.singular_values.front() <= kMaxCondition * s.singular_values.back()) return r;
  }
  throw ConvergenceError("synthesize: could not draw a well-conditioned mixing factor");
}

// Q_i = Ubar_i Sigma_i Z^T with Ubar_i orthonormal on the support of Sigma_i.
std::vector<Matrix> assemble_blocks(const std::vector<Vector>& sigmas, const Matrix& z,
                                    const std::vector<std::size_t>& rows, std::mt19937_64& rng) {
  const std::size_t n = z.rows();
  std::vector<Matrix> q;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    std::vector<std::size_t> support;
    for (std::size_t k = 0; k < n; ++k)
      if (sigmas[i][k] != 0.0) support.push_back(k);
    if (support.size() > rows[i]) {
      std::ostringstream msg;
      msg << "synthesize: block " << i + 1 << " needs " << support.size()
          << " independent left vectors but has " << rows[i] << " rows";
      throw PreconditionError(msg.str());
    }
    const Matrix basis = random_orthonormal(rows[i], support.size(), rng);
    Matrix us(rows[i], n);
    for (std::size_t c = 0; c < support.size(); ++c)
      for (std::size_t r = 0; r < rows[i]; ++r) us(r, support[c]) = basis(r, c) * sigmas[i][support[c]];
    q.push_back(us * z.transposed());
  }
  return q;
}

PlantedInstance finish_instance(std::vector<Vector> sigmas, std::vector<std::size_t> rows,
                                std::vector<SubspaceLabel> labels, std::vector<std::size_t> owners,
                                std::mt19937_64& rng) {
  const std::size_t n = sigmas.front().size();
  const Matrix z = random_orthonormal(n, n, rng);
  std::vector<Matrix> q = assemble_blocks(sigmas, z, rows, rng);
  const Matrix r = random_mixing(n, rng);
  std::vector<Matrix> a;
  for (const auto& qi : q) a.push_back(qi * r);
  return PlantedInstance{MatrixSet(std::move(a)), std::move(q), r, z, std::move(sigmas),
                         std::move(labels), std::move(owners)};
}

bool well_separated(const std::vector<Vector>& sigmas) {
  const std::size_t nb = sigmas.size();
  const std::size_t n = sigmas.front().size();
  for (double pi : kPlantedProbes) {
    const double lo = tau_min(nb, pi);
    const double spread = tau_max(nb, pi) - lo;
    Vector taus(n);
    for (std::size_t k = 0; k < n; ++k) {
      double t = 0.0;
      for (std::size_t i = 0; i < nb; ++i) t += 1.0 / (sigmas[i][k] * sigmas[i][k] + pi);
      taus[k] = t / static_cast<double>(nb);
    }
    Vector targets;
    for (std::size_t p = 0; p < nb; ++p) targets.push_back(tau_of_p(nb, pi, p));
    for (std::size_t k = 0; k < n; ++k) {
      bool planted_target = false;
      for (double t : targets) {
        const double d = std::abs(taus[k] - t) / spread;
        if (d == 0.0 || d < 1e-12) planted_target = true;
      }
      for (std::size_t j = k + 1; j < n; ++j) {
        // Equal planted targets may share a cluster; everything else must be apart.
        const double d = std::abs(taus[k] - taus[j]) / spread;
        if (d < kPlantedGap && !(planted_target && d < 1e-12)) return false;
      }
      if (!planted_target) {
        for (double t : targets)
          if (std::abs(taus[k] - t) / spread < kPlantedGap) return false;
      }
    }
  }
  return true;
}

}  // namespace

Matrix t_tilde_infinity(const OrthoSet& set) {
  const std::size_t n = set.cols();
  Matrix t(n, n);
  for (const auto& q : set.blocks()) {
    const Matrix g = gram(q);
    t += g * g;
  }
  return symmetrized((1.0 / static_cast<double>(set.size())) * t);
}

Matrix t_tilde_infinity_jordan(const OrthoSet& set) {
  const std::size_t n = set.cols();
  const std::size_t nb = set.size();
  std::vector<Matrix> g;
  for (const auto& q : set.blocks()) g.push_back(gram(q));
  Matrix pairs(n, n);
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = i + 1; j < nb; ++j) pairs += g[i] * g[j] + g[j] * g[i];
  const double inv = 1.0 / static_cast<double>(nb);
  return symmetrized(inv * Matrix::identity(n) - inv * pairs);
}

Matrix t_tilde_zero(const OrthoSet& set, std::optional<double> rank_tol) {
  const std::size_t n = set.cols();
  const double tol = rank_tol.value_or(default_rank_tol(n) * 1e3);
  Matrix t(n, n);
  for (const auto& q : set.blocks()) t += row_space_projector(q, tol);
  return symmetrized((1.0 / static_cast<double>(set.size())) * t);
}

Vector make_log_grid(double lo, double hi, std::size_t count) {
  if (count < 2) throw DomainError("make_log_grid: need at least two points");
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
    throw DomainError("make_log_grid: need 0 < lo <= hi");
  Vector grid(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

SweepResult pi_sweep(const MatrixSet& set, std::span<const double> grid, bool parallel) {
  if (grid.empty()) throw DomainError("pi_sweep: empty grid");
  Vector pis(grid.begin(), grid.end());
  for (double pi : pis) require_valid_pi(pi);
  std::sort(pis.begin(), pis.end());

  const QRStack qr = stack_and_qr(set);
  const OrthoSet base(qr.q, pis.front());
  const std::size_t nb = set.size();
  const std::size_t n = set.cols();

  SweepResult out;
  out.points.resize(pis.size());
  parallel::for_each_index(
      pis.size(),
      [&](std::size_t j) {
        const SymEigResult eig = t_pi_eigensystem(base.with_pi(pis[j]));
        SweepPoint& p = out.points[j];
        p.pi = pis[j];
        p.taus = eig.eigenvalues;
        p.varsigmas.resize(n);
        for (std::size_t k = 0; k < n; ++k) p.varsigmas[k] = varsigma_from_tau(p.taus[k], p.pi, nb);
        p.z = eig.eigenvectors;
        p.overlap.assign(n, 1.0);
        p.crossing.assign(n, false);
      },
      parallel);

  // Sequential matching pass.
  for (std::size_t j = 1; j < out.points.size(); ++j) {
    const SweepPoint& prev = out.points[j - 1];
    SweepPoint& cur = out.points[j];
    const Matrix o = transpose_times(prev.z, cur.z);
    std::vector<bool> row_used(n, false), col_used(n, false);
    std::vector<std::size_t> match(n);
    for (std::size_t step = 0; step < n; ++step) {
      double best = -1.0;
      std::size_t br = 0, bc = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (row_used[r]) continue;
        for (std::size_t c = 0; c < n; ++c) {
          if (col_used[c]) continue;
          if (std::abs(o(r, c)) > best) {
            best = std::abs(o(r, c));
            br = r;
            bc = c;
          }
        }
      }
      row_used[br] = col_used[bc] = true;
      match[br] = bc;
    }
    Matrix z(n, n);
    Vector taus(n), vs(n), overlap(n);
    std::vector<bool> crossing(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t c = match[k];
      const double sgn = o(k, c) < 0.0 ? -1.0 : 1.0;
      for (std::size_t i = 0; i < n; ++i) z(i, k) = sgn * cur.z(i, c);
      taus[k] = cur.taus[c];
      vs[k] = cur.varsigmas[c];
      overlap[k] = std::abs(o(k, c));
      crossing[k] = overlap[k] < kCrossingOverlap;
    }
    cur.z = std::move(z);
    cur.taus = std::move(taus);
    cur.varsigmas = std::move(vs);
    cur.overlap = std::move(overlap);
    cur.crossing = std::move(crossing);
  }
  for (auto& p : out.points) p.v = normalized_columns(transpose_times(qr.r, p.z));

  out.zero = make_endpoint(t_tilde_zero(base), qr.r);
  out.infinity = make_endpoint(t_tilde_infinity(base), qr.r);
  return out;
}

std::optional<double> endpoint_angle(const SweepResult& sweep, std::size_t k, bool at_infinity) {
  const SweepPoint& p = at_infinity ? sweep.points.back() : sweep.points.front();
  const SweepEndpoint& e = at_infinity ? sweep.infinity : sweep.zero;
  const Vector zk = p.z.col(k);
  std::size_t best = 0;
  double best_overlap = -1.0;
  for (std::size_t c = 0; c < e.eig.eigenvectors.cols(); ++c) {
    const double ov = std::abs(dot(zk, e.eig.eigenvectors.col(c)));
    if (ov > best_overlap) {
      best_overlap = ov;
      best = c;
    }
  }
  if (!e.simple[best]) return std::nullopt;
  return vector_angle(zk, e.eig.eigenvectors.col(best));
}

double g_pi_value(const OrthoSet& set, std::span<const double> z) {
  return pair_mean(quadratic_forms(set, z, nullptr));
}

Vector g_pi_gradient(const OrthoSet& set, std::span<const double> z) {
  std::vector<Vector> rz;
  const Vector forms = quadratic_forms(set, z, &rz);
  const std::size_t nb = set.size();
  const std::size_t n = z.size();
  Vector grad(n, 0.0);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = i + 1; j < nb; ++j) {
      const double a = forms[i];
      const double b = forms[j];
      for (std::size_t k = 0; k < n; ++k) {
        grad[k] += (2.0 / b) * (rz[i][k] - (a / b) * rz[j][k]) +
                   (2.0 / a) * (rz[j][k] - (b / a) * rz[i][k]);
      }
    }
  }
  const double nn = static_cast<double>(nb);
  for (double& g : grad) g /= nn * (nn - 1.0);
  return grad;
}

double f_pi_value(const MatrixSet& set, double pi, std::span<const double> v) {
  require_valid_pi(pi);
  if (v.size() != set.cols()) throw DimensionError("f_pi: vector length differs from n");
  if (norm2(v) == 0.0) throw DomainError("f_pi: v must be nonzero");
  const Vector av = set.stacked() * v;
  const double total = dot(av, av);
  Vector forms(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vector ai = set.block(i) * v;
    forms[i] = dot(ai, ai) + pi * total;
  }
  return pair_mean(forms);
}

double principal_angle(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("principal_angle: ambient dimensions differ");
  const std::size_t n = a.rows();
  const double tol = default_rank_tol(n) * 1e3;
  const Matrix qa = a.cols() == 0 ? Matrix(n, 0) : column_space_basis(a, tol);
  const Matrix qb = b.cols() == 0 ? Matrix(n, 0) : column_space_basis(b, tol);
  if (qa.cols() != qb.cols()) return std::acos(0.0);
  if (qa.cols() == 0) return 0.0;
  auto one_way = [](const Matrix& p, const Matrix& x) {
    const Matrix resid = x - p * transpose_times(p, x);
    return std::min(1.0, svd(resid).singular_values.front());
  };
  return std::asin(std::max(one_way(qa, qb), one_way(qb, qa)));
}

PlantedInstance synthesize_instance(const InstanceSpec& spec) {
  const std::size_t n = spec.n;
  const std::size_t nb = spec.blocks;
  if (nb < 2 || n == 0) throw PreconditionError("synthesize_instance: need N >= 2 and n >= 1");
  const std::size_t n_iso = spec.isolated_owners.size();
  if (spec.p_common + n_iso > n)
    throw PreconditionError("synthesize_instance: p_common + isolated exceeds n");
  for (std::size_t o : spec.isolated_owners)
    if (o >= nb) throw PreconditionError("synthesize_instance: isolated owner out of range");
  std::vector<std::size_t> rows = spec.rows;
  if (rows.empty()) rows.assign(nb, n + 2);
  if (rows.size() != nb) throw PreconditionError("synthesize_instance: rows length differs from N");

  std::vector<std::size_t> capacity = rows;
  auto take = [&](std::size_t i) {
    if (capacity[i] == 0)
      throw PreconditionError("synthesize_instance: block sizes cannot hold the planted structure");
    --capacity[i];
  };
  for (std::size_t k = 0; k < spec.p_common; ++k)
    for (std::size_t i = 0; i < nb; ++i) take(i);
  for (std::size_t o : spec.isolated_owners) take(o);

  std::mt19937_64 rng(spec.seed);
  const std::size_t n_other = n - spec.p_common - n_iso;

  // Supports for the remaining columns, at least two blocks each.
  // Sizes are capped so later columns keep two slots each; fuller blocks are preferred.
  std::vector<std::vector<std::size_t>> supports(n_other);
  for (std::size_t k = 0; k < n_other; ++k) {
    std::vector<std::size_t> avail;
    std::size_t free_slots = 0;
    for (std::size_t i = 0; i < nb; ++i)
      if (capacity[i] > 0) {
        avail.push_back(i);
        free_slots += capacity[i];
      }
    const std::size_t reserve = 2 * (n_other - k - 1);
    if (avail.size() < 2 || free_slots < reserve + 2)
      throw PreconditionError("synthesize_instance: block sizes cannot hold the planted structure");
    std::shuffle(avail.begin(), avail.end(), rng);
    std::stable_sort(avail.begin(), avail.end(),
                     [&](std::size_t a, std::size_t b) { return capacity[a] > capacity[b]; });
    std::uniform_int_distribution<std::size_t> size_dist(2, std::min(avail.size(), free_slots - reserve));
    avail.resize(size_dist(rng));
    std::sort(avail.begin(), avail.end());
    for (std::size_t i : avail) --capacity[i];
    supports[k] = std::move(avail);
  }

  std::vector<Vector> sigmas(nb, Vector(n, 0.0));
  std::vector<SubspaceLabel> labels(n, SubspaceLabel::unclassified);
  std::vector<std::size_t> owners(n, 0);
  const double common = 1.0 / std::sqrt(static_cast<double>(nb));
  std::size_t col = 0;
  for (; col < spec.p_common; ++col) {
    labels[col] = SubspaceLabel::common;
    for (std::size_t i = 0; i < nb; ++i) sigmas[i][col] = common;
  }
  const std::size_t other_start = col;
  col += n_other;
  for (std::size_t o : spec.isolated_owners) {
    labels[col] = SubspaceLabel::isolated;
    owners[col] = o;
    sigmas[o][col] = 1.0;
    ++col;
  }

  std::uniform_real_distribution<double> weight(0.2, 1.0);
  for (int attempt = 0;; ++attempt) {
    if (attempt == 10000)
      throw PreconditionError("synthesize_instance: could not separate the planted spectrum");
    for (std::size_t k = 0; k < n_other; ++k) {
      double sq = 0.0;
      Vector w(nb, 0.0);
      for (std::size_t i : supports[k]) {
        w[i] = weight(rng);
        sq += w[i] * w[i];
      }
      for (std::size_t i = 0; i < nb; ++i) sigmas[i][other_start + k] = w[i] / std::sqrt(sq);
    }
    if (well_separated(sigmas)) break;
  }
  return finish_instance(std::move(sigmas), std::move(rows), std::move(labels), std::move(owners), rng);
}

PlantedInstance synthesize_with_patterns(const std::vector<Vector>& sigmas,
                                         std::vector<std::size_t> rows, std::uint64_t seed) {
  if (sigmas.size() < 2) throw PreconditionError("synthesize_with_patterns: need N >= 2");
  const std::size_t n = sigmas.front().size();
  if (n == 0) throw PreconditionError("synthesize_with_patterns: empty patterns");
  if (rows.size() != sigmas.size())
    throw PreconditionError("synthesize_with_patterns: rows length differs from N");
  for (std::size_t k = 0; k < n; ++k) {
    double sq = 0.0;
    for (const auto& s : sigmas) {
      if (s.size() != n || s[k] < 0.0)
        throw PreconditionError("synthesize_with_patterns: ragged or negative pattern");
      sq += s[k] * s[k];
    }
    if (std::abs(sq - 1.0) > 1e-12)
      throw PreconditionError("synthesize_with_patterns: pattern columns need unit square sum");
  }
  std::mt19937_64 rng(seed);
  return finish_instance(sigmas, std::move(rows), std::vector<SubspaceLabel>(n, SubspaceLabel::unclassified),
                         std::vector<std::size_t>(n, 0), rng);
}

}  // namespace hogsvd
