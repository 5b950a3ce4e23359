#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hogsvd/errors.hpp"
#include "hogsvd/kernel.hpp"
#include "test_support.hpp"

using hogsvd::Matrix;
using hogsvd::Vector;
using namespace testing_support;

TEST(ThinQr, IdentityIsItsOwnFactor) {
  const auto f = hogsvd::thin_qr(Matrix::identity(2));
  EXPECT_EQ(f.q, Matrix::identity(2));
  EXPECT_EQ(f.r, Matrix::identity(2));
}

TEST(ThinQr, SplitStackOfSharedBasisVectors) {
  // A^T A = diag(2, 1), so R is its Cholesky factor diag(sqrt 2, 1).
  const auto f = hogsvd::thin_qr(Matrix{{1, 0}, {0, 1}, {1, 0}});
  EXPECT_NEAR(f.r(0, 0), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(f.r(1, 1), 1.0, 1e-14);
  EXPECT_NEAR(f.r(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(f.r(1, 0), 0.0, 0.0);
}

TEST(ThinQr, ThreeRowExampleMatchesPrintedFactorUpToColumnSign) {
  const Matrix a{{2, 1}, {1, 0.1}, {0.1, 2}};
  const Matrix printed{{-0.9, 0.04}, {-0.4, -0.2}, {-0.04, 0.98}};
  // Entries are rounded to the digits shown.
  const Matrix printed_half_ulp{{0.05, 0.005}, {0.05, 0.05}, {0.005, 0.005}};
  const auto f = hogsvd::thin_qr(a);
  for (std::size_t j = 0; j < 2; ++j) {
    const double sign = f.q(0, j) * printed(0, j) + f.q(2, j) * printed(2, j) < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(sign * f.q(i, j), printed(i, j), printed_half_ulp(i, j));
  }
}

TEST(ThinQr, RejectsWideInput) {
  EXPECT_THROW(hogsvd::thin_qr(Matrix(2, 3, 1.0)), hogsvd::DimensionError);
}

TEST(ThinQr, RandomReconstructionAndOrthonormality) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    const std::size_t m = n + std::uniform_int_distribution<std::size_t>(0, 12)(rng);
    const Matrix a = uniform_matrix(m, n, rng);
    const auto f = hogsvd::thin_qr(a);
    const double tol = 1e-10 * static_cast<double>(std::max(m, n));
    EXPECT_LE(hogsvd::frobenius_norm(a - f.q * f.r), tol);
    EXPECT_LE(orthonormality_defect(f.q), tol);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_GE(f.r(i, i), 0.0);
      for (std::size_t j = 0; j < i; ++j) EXPECT_EQ(f.r(i, j), 0.0);
    }
  }
}

TEST(SymEig, DiagonalSortsAscending) {
  const auto e = hogsvd::sym_eig(Matrix{{2, 0}, {0, 1}});
  EXPECT_DOUBLE_EQ(e.eigenvalues[0], 1.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues[1], 2.0);
  EXPECT_NEAR(std::abs(e.eigenvectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(e.eigenvectors(0, 1)), 1.0, 1e-15);
}

TEST(SymEig, ScaledIdentityGivesAnyOrthonormalBasis) {
  const auto e = hogsvd::sym_eig((2.0 / 3.0) * Matrix::identity(2));
  EXPECT_NEAR(e.eigenvalues[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(e.eigenvalues[1], 2.0 / 3.0, 1e-15);
  EXPECT_LE(orthonormality_defect(e.eigenvectors), 1e-15);
}

TEST(SymEig, SwapMatrix) {
  const auto e = hogsvd::sym_eig(Matrix{{0, 1}, {1, 0}});
  EXPECT_NEAR(e.eigenvalues[0], -1.0, 1e-15);
  EXPECT_NEAR(e.eigenvalues[1], 1.0, 1e-15);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(e.eigenvectors(0, 0)), r, 1e-15);
  EXPECT_NEAR(e.eigenvectors(0, 0), -e.eigenvectors(1, 0), 1e-15);
  EXPECT_NEAR(e.eigenvectors(0, 1), e.eigenvectors(1, 1), 1e-15);
}

TEST(SymEig, RejectsAsymmetricAndNonFinite) {
  EXPECT_THROW(hogsvd::sym_eig(Matrix{{1, 2}, {0, 1}}), hogsvd::PreconditionError);
  EXPECT_THROW(hogsvd::sym_eig(Matrix{{1, NAN}, {NAN, 1}}), hogsvd::NonFiniteError);
  EXPECT_THROW(hogsvd::sym_eig(Matrix(2, 3)), hogsvd::DimensionError);
}

TEST(SymEig, RandomAgainstEigenOracleTraceAndDeterminant) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 15)(rng);
    const Matrix m = hogsvd::symmetrized(uniform_matrix(n, n, rng));
    const auto e = hogsvd::sym_eig(m);
    const double fro = hogsvd::frobenius_norm(m);
    EXPECT_LE(orthonormality_defect(e.eigenvectors), 1e-12 * static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
      Vector r = m * e.eigenvectors.col(k);
      for (std::size_t i = 0; i < n; ++i) r[i] -= e.eigenvalues[k] * e.eigenvectors(i, k);
      EXPECT_LE(hogsvd::norm2(r), 1e-10 * fro);
      if (k) EXPECT_LE(e.eigenvalues[k - 1], e.eigenvalues[k]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(to_eigen(m));
    double trace = 0.0, sum = 0.0, prod = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(e.eigenvalues[k], oracle.eigenvalues()(static_cast<Eigen::Index>(k)), 1e-12 * fro);
      trace += m(k, k);
      sum += e.eigenvalues[k];
      prod *= e.eigenvalues[k];
    }
    EXPECT_NEAR(sum, trace, 1e-9 * fro);
    if (n <= 4) {
      const double det = to_eigen(m).determinant();
      EXPECT_NEAR(prod, det, 1e-8 * std::max(std::abs(det), 1e-300));
    }
  }
}

TEST(SymEig, DeterministicForIdenticalInput) {
  std::mt19937_64 rng(13);
  const Matrix m = hogsvd::symmetrized(uniform_matrix(9, 9, rng));
  const auto a = hogsvd::sym_eig(m);
  const auto b = hogsvd::sym_eig(m);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.eigenvectors, b.eigenvectors);
}

TEST(Svd, SmallCases) {
  const auto d = hogsvd::svd(Matrix{{2, 0}, {0, 0}});
  EXPECT_DOUBLE_EQ(d.singular_values[0], 2.0);
  EXPECT_DOUBLE_EQ(d.singular_values[1], 0.0);

  const auto row = hogsvd::svd(Matrix{{0, 1}});
  ASSERT_EQ(row.singular_values.size(), 1u);
  EXPECT_NEAR(row.singular_values[0], 1.0, 1e-15);
  EXPECT_NEAR(std::abs(row.right(1, 0)), 1.0, 1e-15);

  const auto e2 = hogsvd::svd(Matrix{{2, 1}});
  EXPECT_NEAR(e2.singular_values[0], std::sqrt(5.0), 1e-14);
}

TEST(Svd, RandomIncludingRankDeficientAgainstEigenOracle) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 60; ++t) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 14)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 14)(rng);
    const std::size_t r = std::uniform_int_distribution<std::size_t>(0, std::min(m, n))(rng);
    const Matrix a = t % 2 ? uniform_matrix(m, n, rng) : low_rank_matrix(m, n, r, rng);
    const auto s = hogsvd::svd(a);
    const double fro = hogsvd::frobenius_norm(a);
    const Matrix rec = hogsvd::reconstruct(s.left, s.singular_values, s.right);
    EXPECT_LE(hogsvd::frobenius_norm(a - rec), 1e-10 * std::max(fro, 1e-300) + 1e-300);
    EXPECT_LE(orthonormality_defect(s.left), 1e-10 * static_cast<double>(std::max(m, n)));
    EXPECT_LE(orthonormality_defect(s.right), 1e-10 * static_cast<double>(std::max(m, n)));
    Eigen::JacobiSVD<Eigen::MatrixXd> oracle(to_eigen(a));
    for (std::size_t k = 0; k < s.singular_values.size(); ++k) {
      EXPECT_GE(s.singular_values[k], 0.0);
      if (k) EXPECT_GE(s.singular_values[k - 1], s.singular_values[k]);
      EXPECT_NEAR(s.singular_values[k], oracle.singularValues()(static_cast<Eigen::Index>(k)),
                  1e-12 * std::max(fro, 1.0));
    }
  }
}

TEST(SpdInverse, Examples) {
  const Matrix inv = hogsvd::spd_inverse(Matrix{{1.5, 0}, {0, 1}});
  EXPECT_NEAR(inv(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(inv(1, 1), 1.0, 1e-15);
  EXPECT_LE(max_abs_diff(hogsvd::spd_inverse(2.0 * Matrix::identity(2)), 0.5 * Matrix::identity(2)), 1e-15);

  // Q_1^T Q_1 = diag(1/2, 0) plus 0.5 I.
  const Matrix q1{{1.0 / std::sqrt(2.0), 0.0}};
  Matrix k = hogsvd::gram(q1);
  k(0, 0) += 0.5;
  k(1, 1) += 0.5;
  const Matrix ki = hogsvd::spd_inverse(k);
  EXPECT_NEAR(ki(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(ki(1, 1), 2.0, 1e-15);
}

TEST(SpdInverse, RandomResidualScalesWithCondition) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    Matrix m = hogsvd::gram(uniform_matrix(n + 3, n, rng));
    for (std::size_t i = 0; i < n; ++i) m(i, i) += 0.1;
    const auto eig = hogsvd::sym_eig(m);
    const double kappa = eig.eigenvalues.back() / eig.eigenvalues.front();
    EXPECT_LE(hogsvd::frobenius_norm(m * hogsvd::spd_inverse(m) - Matrix::identity(n)), 1e-10 * kappa);
  }
}

TEST(SpdInverse, RejectsIndefinite) {
  EXPECT_THROW(hogsvd::spd_inverse(Matrix{{1, 0}, {0, -1}}), hogsvd::NotSpdError);
  EXPECT_THROW(hogsvd::spd_inverse(Matrix{{0, 0}, {0, 0}}), hogsvd::NotSpdError);
}

TEST(RowSpaceProjector, Examples) {
  std::mt19937_64 rng(16);
  const Matrix full = uniform_matrix(6, 3, rng);
  EXPECT_LE(max_abs_diff(hogsvd::row_space_projector(full, 1e-12), Matrix::identity(3)), 1e-12);

  const Matrix p = hogsvd::row_space_projector(Matrix{{0, 1}}, 1e-12);
  EXPECT_LE(max_abs_diff(p, Matrix{{0, 0}, {0, 1}}), 1e-15);

  const Matrix p1 = hogsvd::row_space_projector(Matrix{{1.0 / std::sqrt(2.0), 0.0}}, 1e-12);
  EXPECT_LE(max_abs_diff(p1, Matrix{{1, 0}, {0, 0}}), 1e-15);

  EXPECT_THROW(hogsvd::row_space_projector(full, 0.0), hogsvd::DomainError);
}

TEST(RowSpaceProjector, IdempotentAndFixesRowSpace) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const std::size_t r = std::uniform_int_distribution<std::size_t>(0, std::min(m, n))(rng);
    const Matrix q = low_rank_matrix(m, n, r, rng);
    const Matrix p = hogsvd::row_space_projector(q, 1e-10);
    EXPECT_LE(hogsvd::frobenius_norm(p - p.transposed()), 1e-12);
    EXPECT_LE(hogsvd::frobenius_norm(p * p - p), 1e-10);
    const Vector x = hogsvd::transpose_times(q, uniform_matrix(m, 1, rng).col(0));
    const Vector px = p * x;
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(px[i], x[i], 1e-9);
  }
}

TEST(TriangularSolves, AgreeWithExplicitProducts) {
  std::mt19937_64 rng(18);
  const std::size_t n = 6;
  Matrix r = hogsvd::thin_qr(uniform_matrix(10, n, rng)).r;
  const Matrix b = uniform_matrix(n, 4, rng);
  EXPECT_LE(hogsvd::frobenius_norm(r * hogsvd::solve_upper(r, b) - b), 1e-12);
  const Matrix a = uniform_matrix(5, n, rng);
  EXPECT_LE(hogsvd::frobenius_norm(hogsvd::right_divide_upper(a, r) * r - a), 1e-12);
}
