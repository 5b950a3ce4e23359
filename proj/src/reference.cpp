#include "hogsvd/reference.hpp"

#include <utility>
#include <vector>

#include "hogsvd/errors.hpp"
#include "hogsvd/kernel.hpp"

namespace hogsvd::reference {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

MeanOperator build_t_pi(const OrthoSet& set) {
  const std::size_t n = set.cols();
  Matrix t(n, n);
  for (const auto& q : set.blocks()) {
    Matrix k = gram(q);
    for (std::size_t d = 0; d < n; ++d) k(d, d) += set.pi();
    t += spd_inverse(k);
  }
  t = (1.0 / static_cast<double>(set.size())) * t;
  return {symmetrized(t), set.pi(), set.size(), OperatorKind::t_pi};
}

MeanOperator build_s_pi_direct(const MatrixSet& set, double pi) {
  if (!(pi > 0.0)) throw DomainError("build_s_pi_direct: pi must be positive");
  stack_and_qr(set);
  const std::size_t nb = set.size();
  const Matrix g = gram(set.stacked());
  std::vector<Matrix> d, dinv;
  for (const auto& a : set.blocks()) {
    d.push_back(gram(a) + pi * g);
    dinv.push_back(spd_inverse(d.back()));
  }
  Matrix s(set.cols(), set.cols());
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = i + 1; j < nb; ++j) s += matmul(d[i], dinv[j]) + matmul(d[j], dinv[i]);
  const double nn = static_cast<double>(nb);
  return {(1.0 / (nn * (nn - 1.0))) * s, pi, nb, OperatorKind::s_pi};
}

SweepResult pi_sweep(const MatrixSet& set, std::span<const double> grid) {
  return hogsvd::pi_sweep(set, grid, false);
}

}  // namespace hogsvd::reference
