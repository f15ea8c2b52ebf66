#include "extrapolmv/diagnostics.hpp"

#include "extrapolmv/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace extrapolmv {

namespace {
constexpr double kClampTol = 1e-10;
}

DesignFactor::DesignFactor(const Matrix& x) : rows_(x.rows()) {
  if (x.cols() == 0) throw std::invalid_argument("design matrix has no columns");
  if (x.rows() < x.cols()) throw NumericalError("singular X'X: fewer rows than columns");
  lower_ = cholesky_lower(x.transpose() * x, "singular X'X: design matrix is not full column rank");
}

double DesignFactor::quadratic(const Eigen::Ref<const Vector>& x0) const {
  if (x0.size() != lower_.rows()) {
    throw std::invalid_argument("covariate row has " + std::to_string(x0.size()) + " entries, expected " +
                                std::to_string(lower_.rows()));
  }
  const Vector z = lower_.triangularView<Eigen::Lower>().solve(x0);
  return z.squaredNorm();
}

Vector hat_diagonal(const Matrix& x) {
  const DesignFactor f(x);
  // Solve L Z = X' for all rows at once; h_i = |Z_{.i}|^2.
  const Matrix z = f.lower().triangularView<Eigen::Lower>().solve(x.transpose());
  Vector h = z.colwise().squaredNorm().transpose();
  for (Index i = 0; i < h.size(); ++i) {
    if (h(i) > 1.0) {
      if (h(i) > 1.0 + kClampTol) {
        throw NumericalError("leverage " + format_double(h(i)) + " exceeds 1 at row " + std::to_string(i));
      }
      h(i) = 1.0;
    }
  }
  return h;
}

double ivh_value(const Matrix& x, const Vector& x0) { return DesignFactor(x).quadratic(x0); }

bool ivh_contains(const Matrix& x, const Vector& x0) {
  const double v = ivh_value(x, x0);
  return v <= hat_diagonal(x).maxCoeff();
}

double mahalanobis_sq(const Vector& x, const Vector& xbar, const Matrix& s) {
  if (x.size() != xbar.size() || s.rows() != x.size() || s.cols() != x.size()) {
    throw std::invalid_argument("mahalanobis_sq: dimension mismatch");
  }
  const Matrix l = cholesky_lower(s, "singular covariance matrix in Mahalanobis distance");
  const Vector z = l.triangularView<Eigen::Lower>().solve(x - xbar);
  return z.squaredNorm();
}

double leverage_from_mahalanobis(double md2, Index l) {
  if (l < 2) throw std::invalid_argument("leverage_from_mahalanobis requires l >= 2");
  if (md2 < 0.0) throw std::invalid_argument("squared Mahalanobis distance must be non-negative");
  return 1.0 / static_cast<double>(l) + md2 / static_cast<double>(l - 1);
}

Vector cooks_distance(const Matrix& x, const Vector& y) {
  const Index l = x.rows();
  const Index q = x.cols();
  if (y.size() != l) throw std::invalid_argument("cooks_distance: y length does not match X rows");
  if (l <= q) throw std::invalid_argument("cooks_distance requires more rows than columns");
  const DesignFactor f(x);
  const Vector beta = f.lower().transpose().triangularView<Eigen::Upper>().solve(
      f.lower().triangularView<Eigen::Lower>().solve(x.transpose() * y));
  const Vector r = y - x * beta;
  const Vector h = hat_diagonal(x);
  const double rss = r.squaredNorm();
  const double scale = std::max(1.0, y.norm());
  Vector d = Vector::Zero(l);
  if (rss <= std::pow(1e-12 * scale, 2)) return d;
  const double s2 = rss / static_cast<double>(l - q);
  for (Index i = 0; i < l; ++i) {
    const double one_minus = 1.0 - h(i);
    if (one_minus <= kClampTol) {
      d(i) = std::numeric_limits<double>::infinity();
      continue;
    }
    const double t2 = r(i) * r(i) / (s2 * one_minus);
    d(i) = t2 / static_cast<double>(q) * (h(i) / one_minus);
  }
  return d;
}

IndexSet high_leverage_set(const Vector& h, const LeverageRule& rule) {
  if (h.size() == 0) throw std::invalid_argument("high_leverage_set: empty leverage vector");
  IndexSet out;
  switch (rule.kind) {
    case LeverageRule::Kind::multiple_of_mean: {
      if (rule.factor < 0.0) throw std::invalid_argument("leverage factor must be non-negative");
      const double cut = rule.factor * h.mean();
      for (Index i = 0; i < h.size(); ++i) {
        if (h(i) > cut) out.push_back(i);
      }
      break;
    }
    case LeverageRule::Kind::top_fraction: {
      if (!(rule.fraction >= 0.0 && rule.fraction <= 1.0)) {
        throw std::invalid_argument("leverage fraction must lie in [0, 1]");
      }
      const auto count = static_cast<Index>(std::ceil(rule.fraction * static_cast<double>(h.size())));
      IndexSet order(static_cast<std::size_t>(h.size()));
      std::iota(order.begin(), order.end(), Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return h(a) > h(b); });
      out.assign(order.begin(), order.begin() + std::min(count, h.size()));
      std::sort(out.begin(), out.end());
      break;
    }
  }
  return out;
}

LeverageReport leverage_report(const Matrix& x, const LeverageRule& rule) {
  LeverageReport r;
  r.h = hat_diagonal(x);
  r.h_max = r.h.maxCoeff();
  r.trace_H = r.h.sum();
  r.high_leverage = high_leverage_set(r.h, rule);
  return r;
}

std::string to_csv(const LeverageReport& report, const std::vector<std::string>& ids) {
  if (static_cast<Index>(ids.size()) != report.h.size()) throw std::invalid_argument("ids length mismatch");
  std::vector<bool> flagged(ids.size(), false);
  for (Index i : report.high_leverage) flagged[static_cast<std::size_t>(i)] = true;
  std::string out = "id,h,flagged\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out += csv::join_row({ids[i], format_double(report.h(static_cast<Index>(i))), flagged[i] ? "1" : "0"});
    out.push_back('\n');
  }
  return out;
}

}  // namespace extrapolmv
