#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "extrapolmv/conditional.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace extrapolmv;

namespace {

// Empirical conditional moments of target given the conditioning block from
// simulated draws: regress target on the given components, evaluate the
// fitted line at `values`, and take the residual variance.
std::pair<double, double> empirical_conditional(const Vector& mu, const Matrix& sigma, Index target, const IndexSet& given,
                                                const Vector& values, int draws, std::uint64_t seed) {
  auto g = testutil::rng(seed);
  const Matrix chol = Eigen::LLT<Matrix>(sigma).matrixL();
  const auto k = static_cast<Index>(given.size());
  Matrix design(draws, k + 1);
  Vector response(draws);
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector z(mu.size());
  for (int a = 0; a < draws; ++a) {
    for (Index i = 0; i < z.size(); ++i) z(i) = n01(g);
    const Vector y = mu + chol * z;
    design(a, 0) = 1.0;
    for (Index j = 0; j < k; ++j) design(a, j + 1) = y(given[static_cast<std::size_t>(j)]);
    response(a) = y(target);
  }
  const Vector beta = testutil::ols(design, response);
  const Vector resid = response - design * beta;
  Vector point(k + 1);
  point(0) = 1.0;
  point.tail(k) = values;
  return {point.dot(beta), resid.squaredNorm() / static_cast<double>(draws - k - 1)};
}

}  // namespace

TEST_CASE("independent components are unaffected by conditioning") {
  Vector mu(4);
  mu << 1, 2, 3, 4;
  Vector v(2);
  v << -5, 7;
  const auto m = conditional_mvn(mu, Matrix::Identity(4, 4), {0, 2}, {1, 3}, v);
  CHECK(m.mean(0) == 1.0);
  CHECK(m.mean(1) == 3.0);
  CHECK(m.cov.isApprox(Matrix::Identity(2, 2)));
}

TEST_CASE("empty conditioning returns the marginal block exactly") {
  auto g = testutil::rng(1);
  const Matrix s = testutil::random_spd(g, 4);
  const Vector mu = testutil::gaussian(g, 4, 1);
  const auto m = conditional_mvn(mu, s, {3, 1}, {}, Vector());
  CHECK(m.mean(0) == mu(3));
  CHECK(m.mean(1) == mu(1));
  CHECK(m.cov(0, 0) == s(3, 3));
  CHECK(m.cov(0, 1) == s(3, 1));
}

TEST_CASE("bivariate rho 0.6 conditioned on y2 = 1") {
  Matrix s(2, 2);
  s << 1, 0.6, 0.6, 1;
  const auto m = conditional_mvn(Vector::Zero(2), s, {0}, {1}, Vector::Ones(1));
  CHECK(m.mean(0) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(m.cov(0, 0) == doctest::Approx(0.64).epsilon(1e-14));
  const auto [mean, var] = empirical_conditional(Vector::Zero(2), s, 0, {1}, Vector::Ones(1), 1000000, 17);
  CHECK(std::abs(mean - 0.6) / 0.6 < 0.01);
  CHECK(std::abs(var - 0.64) / 0.64 < 0.01);
}

TEST_CASE("conditional mean moves toward the observed sibling") {
  Matrix s(2, 2);
  s << 2, 1.2, 1.2, 1.5;
  Vector mu(2);
  mu << 1, -1;
  const auto m = conditional_mvn(mu, s, {0}, {1}, Vector::Constant(1, 2.0));
  CHECK(m.mean(0) > mu(0));
  CHECK(m.mean(0) == doctest::Approx(1.0 + 1.2 / 1.5 * 3.0));
}

TEST_CASE("conditioning never increases the variance") {
  auto g = testutil::rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const Matrix s = testutil::random_spd(g, 4, 0.05);
    const auto gain = conditional_gain(s, {rep % 4}, {(rep + 1) % 4, (rep + 2) % 4});
    CHECK(gain.cov(0, 0) <= s(rep % 4, rep % 4) + 1e-12);
  }
}

TEST_CASE("invalid index sets and singular blocks are rejected") {
  const Matrix s = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(conditional_mvn(Vector::Zero(3), s, {0}, {0}, Vector::Zero(1)), std::invalid_argument);
  CHECK_THROWS_AS(conditional_mvn(Vector::Zero(3), s, {0}, {5}, Vector::Zero(1)), std::invalid_argument);
  Matrix sing = Matrix::Ones(3, 3);
  sing(0, 0) = 2.0;
  CHECK_THROWS_AS(conditional_mvn(Vector::Zero(3), sing, {0}, {1, 2}, Vector::Zero(2)), NumericalError);
}

TEST_CASE("moments agree with simulated conditionals on random configurations") {
  auto g = testutil::rng(3);
  for (int rep = 0; rep < 3; ++rep) {
    const Matrix s = testutil::random_spd(g, 3);
    const Vector mu = testutil::gaussian(g, 3, 1);
    const Vector vals = mu.tail(2) + testutil::gaussian(g, 2, 1) * 0.5;
    const auto m = conditional_mvn(mu, s, {0}, {1, 2}, vals);
    const auto [mean, var] = empirical_conditional(mu, s, 0, {1, 2}, vals, 400000, 100 + rep);
    CHECK(std::abs(var - m.cov(0, 0)) / m.cov(0, 0) < 0.01);
    CHECK(std::abs(mean - m.mean(0)) < 0.01 * std::max(1.0, std::abs(m.mean(0))));
  }
}
