#pragma once

#include <stdexcept>
#include <string>

namespace hogsvd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible (row/column counts, block counts).
class DimensionError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Cholesky met a non-positive pivot.
class NotSpdError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument lies outside its admissible range (pi <= 0, P >= N, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The caller broke a documented precondition that is not a shape or domain issue.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The stacked matrix [A_1; ...; A_N] is column-rank deficient.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, double sigma_min, double sigma_max)
      : Error(what), sigma_min_(sigma_min), sigma_max_(sigma_max) {}

  double sigma_min() const noexcept { return sigma_min_; }
  double sigma_max() const noexcept { return sigma_max_; }
  double ratio() const noexcept { return sigma_max_ > 0.0 ? sigma_min_ / sigma_max_ : 0.0; }

 private:
  double sigma_min_;
  double sigma_max_;
};

/// Blocks handed to the HO-CSD do not satisfy sum_i Q_i^T Q_i = I.
class OrthogonalityError : public Error {
 public:
  OrthogonalityError(const std::string& what, double defect) : Error(what), defect_(defect) {}
  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

/// No special case (identity padding, N = 2 with full-rank A_1) matches the input.
class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Malformed command-line arguments (grid spec, option values).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace hogsvd
