#pragma once

#include "extrapolmv/common.hpp"

#include <string>
#include <vector>

namespace extrapolmv {

/// Cholesky factor of X'X, reused for leverage-type quadratic forms
/// x'(X'X)^{-1}x = |L^{-1}x|^2. The l x l hat matrix is never formed.
class DesignFactor {
 public:
  explicit DesignFactor(const Matrix& x);

  double quadratic(const Eigen::Ref<const Vector>& x0) const;
  Index rows() const { return rows_; }
  Index cols() const { return lower_.rows(); }
  const Matrix& lower() const { return lower_; }

 private:
  Matrix lower_;
  Index rows_ = 0;
};

/// Leverages h_ii = x_i'(X'X)^{-1}x_i. Values above 1 by at most 1e-10 are
/// clamped to 1; anything larger signals a broken factorization.
Vector hat_diagonal(const Matrix& x);

/// x0'(X'X)^{-1}x0; x0 includes the intercept slot.
double ivh_value(const Matrix& x, const Vector& x0);

/// Independent variable hull membership: ivh_value(X, x0) <= max_i h_ii.
bool ivh_contains(const Matrix& x, const Vector& x0);

/// (x - xbar)' S^{-1} (x - xbar) for a covariate row without intercept.
double mahalanobis_sq(const Vector& x, const Vector& xbar, const Matrix& s);

/// h_ii = 1/l + MD^2/(l - 1).
double leverage_from_mahalanobis(double md2, Index l);

/// Cook's distance D_i = t_i^2/q * h_ii/(1 - h_ii) with internally
/// studentized residuals t_i = r_i/(s sqrt(1 - h_ii)) and s^2 = r'r/(l - q).
/// Rows with h_ii = 1 report +infinity. An exact fit reports all zeros.
Vector cooks_distance(const Matrix& x, const Vector& y);

struct LeverageRule {
  enum class Kind { multiple_of_mean, top_fraction };
  Kind kind = Kind::multiple_of_mean;
  double factor = 3.0;     // flag h_ii > factor * mean(h) = factor * q/l
  double fraction = 0.01;  // flag the ceil(fraction * l) largest leverages
};

/// Indices flagged as potential influential points, ascending.
IndexSet high_leverage_set(const Vector& h, const LeverageRule& rule);

struct LeverageReport {
  Vector h;
  double h_max = 0.0;
  double trace_H = 0.0;
  IndexSet high_leverage;
};

LeverageReport leverage_report(const Matrix& x, const LeverageRule& rule = {});

/// CSV with header id,h,flagged.
std::string to_csv(const LeverageReport& report, const std::vector<std::string>& ids);

}  // namespace extrapolmv
