#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hogsvd {

using Vector = std::vector<double>;

/// Dense real matrix with row-major storage.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  Vector col(std::size_t j) const;
  void set_col(std::size_t j, std::span<const double> values);

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix& operator+=(Matrix& a, const Matrix& b);

/// Matrix product. Rows of the result are distributed over OpenMP threads for
/// large operands; every entry is accumulated in ascending inner-index order,
/// so the result matches reference::matmul bit for bit.
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

/// a^T * b without forming the transpose.
Matrix transpose_times(const Matrix& a, const Matrix& b);
/// a^T * a.
Matrix gram(const Matrix& a);
Vector transpose_times(const Matrix& a, std::span<const double> x);

/// (m + m^T) / 2.
Matrix symmetrized(const Matrix& m);

double frobenius_norm(const Matrix& a) noexcept;
double dot(std::span<const double> x, std::span<const double> y) noexcept;
double norm2(std::span<const double> x) noexcept;
double column_norm(const Matrix& a, std::size_t j) noexcept;

/// Vertical concatenation; all blocks must share the column count.
Matrix vstack(std::span<const Matrix> blocks);
Matrix select_columns(const Matrix& a, std::span<const std::size_t> columns);
Matrix permute_columns(const Matrix& a, std::span<const std::size_t> order);

/// Throws NonFiniteError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& a, const std::string& what);

}  // namespace hogsvd
