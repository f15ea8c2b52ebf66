#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "extrapolmv/csv.hpp"
#include "extrapolmv/dataset.hpp"
#include "test_util.hpp"

#include <cmath>
#include <cstring>

using namespace extrapolmv;

namespace {

IngestConfig basic_config() {
  IngestConfig c;
  c.id_col = "id";
  c.covariates = {"a", "b"};
  c.responses = {"y1", "y2"};
  c.response_transforms = std::vector<Transform>{Transform::none, Transform::none};
  c.standardize = false;
  return c;
}

const char* kFiveRows =
    "id,a,b,y1,y2\n"
    "p1,0.5,1.0,2.0,3.0\n"
    "p2,1.5,-1.0,NA,4.5\n"
    "p3,-2.0,0.25,1.0,2.0\n"
    "p4,3.0,2.0,,1.0\n"
    "p5,0.1,-0.7,0.5,NA\n";

}  // namespace

TEST_CASE("csv parser handles quotes, embedded commas and blank lines") {
  const auto t = csv::parse("\xEF\xBB\xBFx,\"y, z\"\n\n1,\"he said \"\"hi\"\"\"\r\n2,3\n");
  REQUIRE(t.header == std::vector<std::string>{"x", "y, z"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "he said \"hi\"");
  CHECK(t.line_numbers[0] == 3);
  CHECK(t.line_numbers[1] == 4);
  CHECK_THROWS_AS(csv::parse("a,b\n1,2,3\n"), DataError);
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("plain") == "plain");
}

TEST_CASE("format_double round-trips exactly") {
  auto g = testutil::rng(11);
  std::normal_distribution<double> n(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = n(g) * std::pow(10.0, i % 30 - 15);
    CHECK(*csv::parse_double(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "Inf");
  CHECK(std::isinf(*csv::parse_double("-Inf")));
}

TEST_CASE("missing tokens map to false mask entries") {
  IngestConfig c = basic_config();
  const Dataset d = parse_csv(kFiveRows, c);
  CHECK(d.rows() == 5);
  CHECK(d.num_covariates() == 3);
  CHECK(d.covariate_names.front() == "(Intercept)");
  CHECK((d.X.col(0).array() == 1.0).all());
  CHECK(d.mask.count() == 7);
  CHECK_FALSE(d.mask(1, 0));
  CHECK_FALSE(d.mask(3, 0));
  CHECK_FALSE(d.mask(4, 1));
  CHECK(std::isnan(d.Y(1, 0)));
}

TEST_CASE("a single NA cell gives exactly one unobserved entry") {
  IngestConfig c = basic_config();
  c.covariates = {"a"};
  const std::string text =
      "id,a,y1,y2\n"
      "u,0,1,2\n"
      "v,1,NA,3\n"
      "w,3,2,5\n"
      "x,2,4,1\n";
  const Dataset d = parse_csv(text, c);
  CHECK(d.mask.size() - d.mask.count() == 1);
}

TEST_CASE("ingestion errors carry row and column context") {
  IngestConfig c = basic_config();
  SUBCASE("non-numeric covariate") {
    try {
      parse_csv("id,a,b,y1,y2\np1,1,2,3,4\np2,oops,1,1,1\np3,2,2,2,2\np4,3,1,1,1\np5,0,0,1,1\n", c);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(e.row() == 3);
      CHECK(e.col() == 2);
    }
  }
  SUBCASE("duplicate id") {
    CHECK_THROWS_AS(parse_csv("id,a,b,y1,y2\np1,1,2,3,4\np1,0,1,1,1\n", c), DataError);
  }
  SUBCASE("missing covariate") {
    CHECK_THROWS_AS(parse_csv("id,a,b,y1,y2\np1,NA,2,3,4\n", c), DataError);
  }
  SUBCASE("wrong field count") {
    CHECK_THROWS_AS(parse_csv("id,a,b,y1,y2\np1,1,2,3\n", c), DataError);
  }
  SUBCASE("covariate that duplicates the intercept") {
    CHECK_THROWS_WITH_AS(parse_csv("id,a,b,y1,y2\np1,1,2,3,4\np2,1,1,1,1\np3,1,5,1,1\np4,1,3,2,2\np5,1,4,1,1\n", c),
                         doctest::Contains("rank"), DataError);
  }
  SUBCASE("too few rows") {
    CHECK_THROWS_AS(parse_csv("id,a,b,y1,y2\np1,1,2,3,4\np2,0,1,1,1\np3,2,5,1,1\n", c), DataError);
  }
}

TEST_CASE("csv write and reload reproduces numeric values") {
  const Dataset d = parse_csv(kFiveRows, basic_config());
  const Dataset back = parse_csv(to_csv(d, basic_config()), basic_config());
  CHECK((back.X - d.X).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(back.mask == d.mask);
  for (Index i = 0; i < d.rows(); ++i)
    for (Index c = 0; c < d.num_responses(); ++c)
      if (d.mask(i, c)) CHECK(std::abs(back.Y(i, c) - d.Y(i, c)) <= 1e-12);
  CHECK(dataset_hash(back) == dataset_hash(d));

  testutil::TempDir dir("dataset");
  auto [synth, truth] = synthesize(GeneratorConfig{}, 3);
  const IngestConfig sc = synthetic_ingest_config(synth);
  write_csv(synth, dir / "d.csv", sc);
  const Dataset reread = load_csv(dir / "d.csv", sc);
  CHECK(reread.X == synth.X);
  CHECK(dataset_hash(reread) == dataset_hash(synth));
}

TEST_CASE("ingest config json round trip and explicit response transforms") {
  const auto j = nlohmann::json::parse(R"({"id_col":"lake","lon_col":"x","lat_col":"y","covariates":["a","b"],
      "responses":["tn","tp"],"missing_token":"-","transforms":{"responses":"log","covariates":{"b":"log1p"}}})");
  const IngestConfig c = ingest_config_from_json(j);
  CHECK(c.id_col == "lake");
  CHECK(*c.lon_col == "x");
  CHECK(c.missing_token == "-");
  CHECK((*c.response_transforms)[1] == Transform::log);
  CHECK(c.covariate_transforms[0] == Transform::none);
  CHECK(c.covariate_transforms[1] == Transform::log1p);
  CHECK(c.standardize);
  CHECK(ingest_config_from_json(to_json(c)).transform_spec().response == c.transform_spec().response);

  IngestConfig unconfirmed = c;
  unconfirmed.response_transforms.reset();
  CHECK_THROWS_AS(unconfirmed.transform_spec(), DataError);
}

TEST_CASE("log of ones is zero and standardizing 1,2,3 gives -1,0,1") {
  Matrix x(5, 2);
  x << 1, 1, 1, 2, 1, 3, 1, 2, 1, 2;
  Matrix y = Matrix::Ones(5, 1);
  Dataset d = testutil::make_dataset(x, y);
  TransformSpec spec;
  spec.response = {Transform::log};
  spec.standardize = {true};
  const auto r = apply_transforms(d, spec);
  CHECK((r.data.Y.array() == 0.0).all());

  Matrix x3(3, 2);
  x3 << 1, 1, 1, 2, 1, 3;
  Dataset d3 = testutil::make_dataset(x3, Matrix::Ones(3, 1));
  TransformSpec s3;
  s3.standardize = {true};
  const auto r3 = apply_transforms(d3, s3);
  CHECK(r3.data.X(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(r3.data.X(1, 1) == doctest::Approx(0.0));
  CHECK(r3.data.X(2, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r3.fitted.center(0) == 2.0);
  CHECK(r3.fitted.scale(0) == 1.0);
}

TEST_CASE("identity transform leaves data bitwise unchanged and inverse restores inputs") {
  auto [d, truth] = synthesize(GeneratorConfig{}, 9);
  TransformSpec none;
  none.response.assign(4, Transform::none);
  none.covariate.assign(5, Transform::none);
  none.standardize.assign(5, false);
  const auto r = apply_transforms(d, none);
  CHECK(std::memcmp(r.data.X.data(), d.X.data(), sizeof(double) * static_cast<std::size_t>(d.X.size())) == 0);
  CHECK(dataset_hash(r.data) == dataset_hash(d));

  TransformSpec std_all = none;
  std_all.standardize.assign(5, true);
  const auto s = apply_transforms(d, std_all);
  for (Index c = 1; c < d.num_covariates(); ++c) {
    CHECK(std::abs(s.data.X.col(c).mean()) < 1e-12);
  }
  const Dataset back = invert_transforms(s.data, s.fitted);
  CHECK(((back.X - d.X).array().abs() / d.X.array().abs().max(1.0)).maxCoeff() <= 1e-12);
}

TEST_CASE("log transform rejects non-positive values with location") {
  Matrix x(4, 1);
  x.setOnes();
  Matrix y(4, 1);
  y << 1, 2, 0, 3;
  Dataset d = testutil::make_dataset(x, y);
  TransformSpec spec;
  spec.response = {Transform::log};
  try {
    apply_transforms(d, spec);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.row() == 2);
    CHECK(e.col() == 0);
  }
}

TEST_CASE("status partition is disjoint and exhaustive") {
  Matrix x = Matrix::Ones(3, 1);
  Dataset d = testutil::make_dataset(x, Matrix::Zero(3, 4));
  d.mask.row(1) << true, false, true, true;
  d.mask.row(2).setConstant(false);
  const auto p = partition_by_status(d);
  CHECK(p.fully_observed == IndexSet{0});
  CHECK(p.partially_observed == IndexSet{1});
  CHECK(p.unobserved == IndexSet{2});
  CHECK(observed_rows(d) == IndexSet{0, 1});

  d.mask.setConstant(true);
  CHECK(partition_by_status(d).fully_observed.size() == 3);
  d.mask.setConstant(false);
  CHECK(partition_by_status(d).unobserved.size() == 3);

  auto g = testutil::rng(5);
  std::bernoulli_distribution coin(0.4);
  Dataset r = testutil::make_dataset(Matrix::Ones(200, 1), Matrix::Zero(200, 3));
  for (Index i = 0; i < 200; ++i)
    for (Index c = 0; c < 3; ++c) r.mask(i, c) = coin(g);
  const auto q = partition_by_status(r);
  std::vector<int> seen(200, 0);
  for (const auto* set : {&q.fully_observed, &q.partially_observed, &q.unobserved})
    for (Index i : *set) ++seen[static_cast<std::size_t>(i)];
  CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
  for (Index i : q.fully_observed) CHECK(r.mask.row(i).all());
  for (Index i : q.unobserved) CHECK_FALSE(r.mask.row(i).any());
}

TEST_CASE("synthesize is reproducible and honours its parameters") {
  GeneratorConfig g;
  g.missing_prob = {0.0, 0.0, 0.0, 0.0};
  auto [a, ta] = synthesize(g, 42);
  auto [b, tb] = synthesize(g, 42);
  CHECK(dataset_hash(a) == dataset_hash(b));
  CHECK(a.X == b.X);
  CHECK(a.mask.all());
  auto [c, tc] = synthesize(g, 43);
  CHECK(dataset_hash(a) != dataset_hash(c));

  GeneratorConfig bad = g;
  bad.Sigma = Matrix::Identity(4, 4);
  bad.Sigma(0, 0) = -1.0;
  CHECK_THROWS_AS(synthesize(bad, 1), DataError);
  GeneratorConfig bad_p = g;
  bad_p.missing_prob = {0.0, 1.5, 0.0, 0.0};
  CHECK_THROWS_AS(synthesize(bad_p, 1), DataError);
}

TEST_CASE("synthetic residual covariance approaches Sigma") {
  GeneratorConfig g;
  g.l = 10000;
  g.q = 3;
  g.B = Matrix::Zero(4, 3);
  g.Sigma = Matrix::Identity(4, 4);
  auto [d, truth] = synthesize(g, 8);
  const Matrix centered = d.Y.rowwise() - d.Y.colwise().mean();
  const Matrix s = centered.transpose() * centered / static_cast<double>(d.rows() - 1);
  CHECK((s - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("planted rows carry extreme covariates") {
  GeneratorConfig g;
  g.planted_high_leverage = 4;
  auto [d, truth] = synthesize(g, 1);
  REQUIRE(truth.planted_rows.size() == 4);
  for (Index i : truth.planted_rows) CHECK(d.X.row(i).tail(d.X.cols() - 1).norm() > 4.0);
}
