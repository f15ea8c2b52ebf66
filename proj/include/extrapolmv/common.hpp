#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace extrapolmv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

/// Malformed or inconsistent input data. Carries the offending row/column
/// when known (-1 otherwise); rows are 1-based file lines for CSV input.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what, long row = -1, long col = -1)
      : std::runtime_error(what), row_(row), col_(col) {}
  long row() const noexcept { return row_; }
  long col() const noexcept { return col_; }

 private:
  long row_;
  long col_;
};

/// A factorization failed where the math requires it to succeed
/// (singular X'X, non positive definite covariance, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest absolute asymmetry |A - A'| relative to max(1, max|A|).
double relative_asymmetry(const Matrix& a);

/// log|A| through a Cholesky factor. Returns -infinity when A is not
/// numerically positive definite.
double logdet_psd(const Matrix& a);

/// Lower Cholesky factor, throwing NumericalError with `what` on failure.
Matrix cholesky_lower(const Matrix& a, const char* what);

/// Hex digest (FNV-1a, 64 bit) of a byte string.
std::string fnv1a_hex(const std::string& bytes);

/// Shortest text that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace extrapolmv
