#include "hogsvd/matrix.hpp"

#include <cmath>
#include <sstream>

#include "hogsvd/errors.hpp"
#include "hogsvd/parallel.hpp"

namespace hogsvd {
namespace {

// Below this many multiply-adds the OpenMP fork costs more than it saves.
constexpr std::size_t kParallelFlops = std::size_t{1} << 16;

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows()
        << "x" << b.cols();
    throw DimensionError(msg.str());
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: entry count does not match rows * cols");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Vector Matrix::col(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Matrix::set_col(std::size_t j, std::span<const double> values) {
  if (values.size() != rows_) throw DimensionError("set_col: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Matrix::all_finite() const noexcept {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+");
  Matrix c = a;
  c += b;
  return c;
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+=");
  auto dst = a.data();
  auto src = b.data();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  return a;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator-");
  Matrix c = a;
  auto dst = c.data();
  auto src = b.data();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] -= src[k];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& x : c.data()) x *= s;
  return c;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("operator*: inner dimensions differ");
  const std::size_t m = a.rows();
  const std::size_t inner = a.cols();
  const std::size_t n = b.cols();
  Matrix c(m, n);
  const bool big = m * inner * n >= kParallelFlops;
  parallel::for_each_index(
      m,
      [&](std::size_t i) {
        auto out = c.row(i);
        for (std::size_t k = 0; k < inner; ++k) {
          const double aik = a(i, k);
          auto brow = b.row(k);
          for (std::size_t j = 0; j < n; ++j) out[j] += aik * brow[j];
        }
      },
      big);
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionError("matrix-vector: length mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Matrix transpose_times(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("transpose_times: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ar = a.row(k);
    auto br = b.row(k);
    for (std::size_t i = 0; i < ar.size(); ++i) {
      const double aki = ar[i];
      if (aki == 0.0) continue;
      auto out = c.row(i);
      for (std::size_t j = 0; j < br.size(); ++j) out[j] += aki * br[j];
    }
  }
  return c;
}

Matrix gram(const Matrix& a) { return symmetrized(transpose_times(a, a)); }

Vector transpose_times(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw DimensionError("transpose_times: length mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto r = a.row(k);
    for (std::size_t j = 0; j < r.size(); ++j) y[j] += r[j] * x[k];
  }
  return y;
}

Matrix symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("symmetrized: matrix is not square");
  Matrix s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

double frobenius_norm(const Matrix& a) noexcept { return norm2(a.data()); }

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) noexcept {
  // Scaled accumulation avoids overflow/underflow for extreme entries.
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : x) {
    if (v == 0.0) continue;
    const double a = std::abs(v);
    if (scale < a) {
      ssq = 1.0 + ssq * (scale / a) * (scale / a);
      scale = a;
    } else {
      ssq += (a / scale) * (a / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

double column_norm(const Matrix& a, std::size_t j) noexcept {
  double scale = 0.0;
  double ssq = 1.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double v = a(i, j);
    if (v == 0.0) continue;
    const double x = std::abs(v);
    if (scale < x) {
      ssq = 1.0 + ssq * (scale / x) * (scale / x);
      scale = x;
    } else {
      ssq += (x / scale) * (x / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

Matrix vstack(std::span<const Matrix> blocks) {
  if (blocks.empty()) return {};
  const std::size_t n = blocks.front().cols();
  std::size_t m = 0;
  for (const auto& b : blocks) {
    if (b.cols() != n) throw DimensionError("vstack: blocks have different column counts");
    m += b.rows();
  }
  Matrix out(m, n);
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < n; ++j) out(offset + i, j) = b(i, j);
    offset += b.rows();
  }
  return out;
}

Matrix select_columns(const Matrix& a, std::span<const std::size_t> columns) {
  Matrix out(a.rows(), columns.size());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t c = 0; c < columns.size(); ++c) out(i, c) = a(i, columns[c]);
  return out;
}

Matrix permute_columns(const Matrix& a, std::span<const std::size_t> order) {
  if (order.size() != a.cols()) throw DimensionError("permute_columns: order length mismatch");
  return select_columns(a, order);
}

void require_finite(const Matrix& a, const std::string& what) {
  if (!a.all_finite()) throw NonFiniteError(what + " contains NaN or infinite entries");
}

}  // namespace hogsvd
