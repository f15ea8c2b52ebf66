#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "extrapolmv/diagnostics.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace extrapolmv;

namespace {

Matrix three_point() {
  Matrix x(3, 2);
  x << 1, -1, 1, 0, 1, 1;
  return x;
}

// Sample mean and covariance of the non-intercept columns.
std::pair<Vector, Matrix> moments(const Matrix& x) {
  const Matrix z = x.rightCols(x.cols() - 1);
  const Vector mean = z.colwise().mean().transpose();
  const Matrix c = z.rowwise() - mean.transpose();
  return {mean, c.transpose() * c / static_cast<double>(z.rows() - 1)};
}

// Cook's distance by refitting without each row.
Vector cooks_by_deletion(const Matrix& x, const Vector& y) {
  const Index l = x.rows(), q = x.cols();
  const Vector beta = testutil::ols(x, y);
  const Vector r = y - x * beta;
  const double s2 = r.squaredNorm() / static_cast<double>(l - q);
  const Matrix xtx = x.transpose() * x;
  Vector d(l);
  for (Index i = 0; i < l; ++i) {
    Matrix xd(l - 1, q);
    Vector yd(l - 1);
    for (Index k = 0, m = 0; k < l; ++k) {
      if (k == i) continue;
      xd.row(m) = x.row(k);
      yd(m++) = y(k);
    }
    const Vector diff = testutil::ols(xd, yd) - beta;
    d(i) = diff.dot(xtx * diff) / (static_cast<double>(q) * s2);
  }
  return d;
}

}  // namespace

TEST_CASE("leverage of a square design is one everywhere") {
  auto g = testutil::rng(1);
  const Matrix x = testutil::design(g, 5, 5);
  const Vector h = hat_diagonal(x);
  for (Index i = 0; i < 5; ++i) CHECK(h(i) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("three point design has leverages 5/6, 1/3, 5/6") {
  const Vector h = hat_diagonal(three_point());
  const Vector oracle = testutil::dense_hat(three_point()).diagonal();
  CHECK(h(0) == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
  CHECK(h(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(h(2) == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
  CHECK((h - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("leverages sum to q and stay within [1/l, 1]") {
  auto g = testutil::rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Index l = 20 + 9 * rep, q = 2 + rep % 6;
    const Matrix x = testutil::design(g, l, q);
    const Vector h = hat_diagonal(x);
    CHECK(h.sum() == doctest::Approx(static_cast<double>(q)).epsilon(1e-10));
    CHECK(h.minCoeff() >= 1.0 / static_cast<double>(l) - 1e-12);
    CHECK(h.maxCoeff() <= 1.0);
    const LeverageReport rep_ = leverage_report(x);
    CHECK(rep_.trace_H == doctest::Approx(static_cast<double>(q)).epsilon(1e-10));
    CHECK(rep_.h_max == h.maxCoeff());
  }
}

TEST_CASE("singular design is rejected") {
  Matrix x(4, 2);
  x << 1, 1, 1, 1, 1, 1, 1, 1;
  CHECK_THROWS_AS(hat_diagonal(x), NumericalError);
}

TEST_CASE("ivh value at observed rows, centroid and far points") {
  auto g = testutil::rng(3);
  const Index l = 40;
  Matrix x = testutil::design(g, l, 4);
  const Vector h = hat_diagonal(x);
  for (Index i = 0; i < l; i += 7) {
    CHECK(ivh_value(x, x.row(i).transpose()) == doctest::Approx(h(i)).epsilon(1e-12));
    CHECK(ivh_contains(x, x.row(i).transpose()));
  }
  const Vector centroid = x.colwise().mean().transpose();
  CHECK(ivh_value(x, centroid) == doctest::Approx(1.0 / static_cast<double>(l)).epsilon(1e-12));

  Index argmax;
  h.maxCoeff(&argmax);
  CHECK(ivh_contains(x, x.row(argmax).transpose()));

  Vector far = x.colwise().maxCoeff().transpose() * 100.0;
  far(0) = 1.0;
  CHECK_FALSE(ivh_contains(x, far));

  // Scaling a point away from the center of a centered design increases the form.
  Matrix xc = x;
  for (Index c = 1; c < xc.cols(); ++c) xc.col(c).array() -= xc.col(c).mean();
  Vector x0 = xc.row(5).transpose();
  const double before = ivh_value(xc, x0);
  x0.tail(3) *= 10.0;
  CHECK(ivh_value(xc, x0) > before);
  CHECK_THROWS_AS(ivh_value(x, Vector::Ones(3)), std::invalid_argument);
}

TEST_CASE("ivh membership is invariant to reparameterizing covariates") {
  auto g = testutil::rng(4);
  const Matrix x = testutil::design(g, 60, 4);
  const Matrix t = testutil::random_spd(g, 3) + testutil::gaussian(g, 3, 3) * 0.3;
  Matrix xt = x;
  xt.rightCols(3) = x.rightCols(3) * t;
  for (int k = 0; k < 30; ++k) {
    Vector x0 = Vector::Ones(4);
    x0.tail(3) = testutil::gaussian(g, 3, 1) * (1.0 + 0.2 * k);
    Vector x0t = x0;
    x0t.tail(3) = (x0.tail(3).transpose() * t).transpose();
    CHECK(ivh_value(x, x0) == doctest::Approx(ivh_value(xt, x0t)).epsilon(1e-8));
    CHECK(ivh_contains(x, x0) == ivh_contains(xt, x0t));
  }
}

TEST_CASE("mahalanobis distance basics") {
  Vector xbar = Vector::Zero(3);
  Vector x(3);
  x << 1, 2, 2;
  CHECK(mahalanobis_sq(xbar, xbar, Matrix::Identity(3, 3)) == 0.0);
  CHECK(mahalanobis_sq(x, xbar, Matrix::Identity(3, 3)) == doctest::Approx(9.0));
  auto [mean, cov] = moments(three_point());
  CHECK(mahalanobis_sq(Vector::Constant(1, -1.0), mean, cov) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(mahalanobis_sq(x, xbar, Matrix::Zero(3, 3)), NumericalError);
}

TEST_CASE("leverage from mahalanobis distance") {
  CHECK(leverage_from_mahalanobis(0.0, 10) == doctest::Approx(0.1));
  CHECK(leverage_from_mahalanobis(1.0, 3) == doctest::Approx(hat_diagonal(three_point())(0)).epsilon(1e-14));
  CHECK_THROWS_AS(leverage_from_mahalanobis(1.0, 1), std::invalid_argument);
  auto g = testutil::rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix x = testutil::design(g, 30 + rep * 5, 4);
    const Vector h = hat_diagonal(x);
    auto [mean, cov] = moments(x);
    for (Index i = 0; i < x.rows(); ++i) {
      const double md2 = mahalanobis_sq(x.row(i).tail(3).transpose(), mean, cov);
      CHECK(std::abs(leverage_from_mahalanobis(md2, x.rows()) - h(i)) < 1e-10);
    }
  }
}

TEST_CASE("cooks distance matches the deletion form and is scale invariant") {
  auto g = testutil::rng(6);
  for (int rep = 0; rep < 8; ++rep) {
    const Matrix x = testutil::design(g, 25 + rep, 3);
    const Vector y = x * Vector::LinSpaced(3, -1, 1) + testutil::gaussian(g, x.rows(), 1);
    const Vector d = cooks_distance(x, y);
    const Vector oracle = cooks_by_deletion(x, y);
    CHECK((d - oracle).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((cooks_distance(x, 2.0 * y) - d).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("cooks distance of an exact fit is zero and h = 1 is infinite") {
  auto g = testutil::rng(7);
  const Matrix x = testutil::design(g, 12, 3);
  const Vector y = x * Vector::LinSpaced(3, 1, 3);
  CHECK(cooks_distance(x, y).cwiseAbs().maxCoeff() == 0.0);

  Matrix xs(5, 2);
  xs << 1, 0, 1, 0, 1, 0, 1, 0, 1, 1;  // last row is alone on its covariate value
  Vector ys(5);
  ys << 1, 2, 3, 2, 7;
  const Vector d = cooks_distance(xs, ys);
  CHECK(std::isinf(d(4)));
}

TEST_CASE("high leverage set rules") {
  const Vector balanced = Vector::Constant(20, 0.15);
  CHECK(high_leverage_set(balanced, {}).empty());
  LeverageRule all;
  all.factor = 0.0;
  CHECK(high_leverage_set(balanced, all).size() == 20);
  CHECK_THROWS_AS(high_leverage_set(Vector(), {}), std::invalid_argument);

  auto g = testutil::rng(8);
  Matrix x = testutil::design(g, 100, 4);
  x.row(37).tail(3) << 12.0, -15.0, 10.0;
  const IndexSet flagged = high_leverage_set(hat_diagonal(x), {});
  CHECK(std::find(flagged.begin(), flagged.end(), 37) != flagged.end());

  LeverageRule top;
  top.kind = LeverageRule::Kind::top_fraction;
  top.fraction = 0.05;
  Vector h(6);
  h << 0.1, 0.5, 0.5, 0.2, 0.9, 0.3;
  CHECK(high_leverage_set(h, top) == IndexSet{4});
  top.fraction = 0.4;
  CHECK(high_leverage_set(h, top) == IndexSet{1, 2, 4});
}

TEST_CASE("leverage report csv") {
  const auto r = leverage_report(three_point());
  const std::string csv = to_csv(r, {"a", "b", "c"});
  CHECK(csv.rfind("id,h,flagged\n", 0) == 0);
  CHECK(csv.find("\nb,") != std::string::npos);
}
