#include "extrapolmv/dataset.hpp"

#include "extrapolmv/csv.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

namespace extrapolmv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void append_bytes(std::string& out, const void* p, std::size_t n) {
  out.append(static_cast<const char*>(p), n);
}

std::vector<Transform> parse_transform_list(const nlohmann::json& j,
                                            const std::vector<std::string>& names,
                                            const char* what) {
  std::vector<Transform> out(names.size(), Transform::none);
  if (j.is_string()) {
    std::fill(out.begin(), out.end(), parse_transform(j.get<std::string>()));
  } else if (j.is_array()) {
    if (j.size() != names.size()) {
      throw DataError(std::string(what) + " transform list must have one entry per column");
    }
    for (std::size_t i = 0; i < names.size(); ++i) out[i] = parse_transform(j[i].get<std::string>());
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      auto pos = std::find(names.begin(), names.end(), it.key());
      if (pos == names.end()) {
        throw DataError(std::string(what) + " transform names unknown column '" + it.key() + "'");
      }
      out[static_cast<std::size_t>(pos - names.begin())] = parse_transform(it.value().get<std::string>());
    }
  } else {
    throw DataError(std::string(what) + " transforms must be a string, list or object");
  }
  return out;
}

}  // namespace

// -- validation --------------------------------------------------------------

bool has_full_column_rank(const Matrix& x) {
  if (x.rows() < x.cols()) return false;
  Eigen::LLT<Matrix> llt(x.transpose() * x);
  if (llt.info() != Eigen::Success) return false;
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  return qr.rank() == x.cols();
}

void validate(const Dataset& d) {
  const Index l = d.X.rows();
  const Index q = d.X.cols();
  const Index n = d.Y.cols();
  if (static_cast<Index>(d.ids.size()) != l) throw DataError("ids length does not match X rows");
  if (d.Y.rows() != l) throw DataError("Y rows do not match X rows");
  if (d.mask.rows() != d.Y.rows() || d.mask.cols() != d.Y.cols()) {
    throw DataError("mask dimensions do not match Y");
  }
  if (d.coords && static_cast<Index>(d.coords->size()) != l) {
    throw DataError("coordinate count does not match X rows");
  }
  if (static_cast<Index>(d.response_names.size()) != n) throw DataError("response_names length mismatch");
  if (static_cast<Index>(d.covariate_names.size()) != q) throw DataError("covariate_names length mismatch");
  if (q < 1) throw DataError("design matrix needs an intercept column");
  if (n < 1) throw DataError("at least one response is required");
  for (Index i = 0; i < l; ++i) {
    if (d.X(i, 0) != 1.0) throw DataError("column 0 of X must be the all-ones intercept", i);
    for (Index c = 0; c < q; ++c) {
      if (!std::isfinite(d.X(i, c))) throw DataError("non-finite covariate", i, c);
    }
    for (Index c = 0; c < n; ++c) {
      if (d.mask(i, c) && !std::isfinite(d.Y(i, c))) throw DataError("non-finite observed response", i, c);
    }
  }
  if (l < q + 2) {
    throw DataError("need at least q + 2 = " + std::to_string(q + 2) + " rows, found " + std::to_string(l));
  }
  if (!has_full_column_rank(d.X)) throw DataError("design matrix X is rank deficient");
}

std::string dataset_hash(const Dataset& d) {
  std::string bytes;
  const auto l = static_cast<std::uint64_t>(d.rows());
  const auto q = static_cast<std::uint64_t>(d.num_covariates());
  const auto n = static_cast<std::uint64_t>(d.num_responses());
  append_bytes(bytes, &l, sizeof l);
  append_bytes(bytes, &q, sizeof q);
  append_bytes(bytes, &n, sizeof n);
  for (const auto& s : d.ids) {
    bytes += s;
    bytes.push_back('\0');
  }
  for (const auto& s : d.covariate_names) {
    bytes += s;
    bytes.push_back('\0');
  }
  for (const auto& s : d.response_names) {
    bytes += s;
    bytes.push_back('\0');
  }
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index c = 0; c < d.num_covariates(); ++c) {
      const double v = d.X(i, c);
      append_bytes(bytes, &v, sizeof v);
    }
    for (Index c = 0; c < d.num_responses(); ++c) {
      const char m = d.mask(i, c) ? 1 : 0;
      bytes.push_back(m);
      const double v = d.mask(i, c) ? d.Y(i, c) : 0.0;
      append_bytes(bytes, &v, sizeof v);
    }
  }
  return fnv1a_hex(bytes);
}

// -- ingestion ---------------------------------------------------------------

Transform parse_transform(const std::string& tag) {
  if (tag == "none") return Transform::none;
  if (tag == "log") return Transform::log;
  if (tag == "log1p") return Transform::log1p;
  throw DataError("unknown transform '" + tag + "' (expected none, log or log1p)");
}

std::string to_string(Transform t) {
  switch (t) {
    case Transform::none: return "none";
    case Transform::log: return "log";
    case Transform::log1p: return "log1p";
  }
  return "none";
}

TransformSpec IngestConfig::transform_spec() const {
  if (!response_transforms) {
    throw DataError(
        "response transforms are not stated: set transforms.responses in the config "
        "(\"log\" is the usual choice, \"none\" disables it)");
  }
  TransformSpec t;
  t.response = *response_transforms;
  t.covariate = covariate_transforms;
  t.standardize.assign(covariates.size(), standardize);
  return t;
}

IngestConfig ingest_config_from_json(const nlohmann::json& j) {
  IngestConfig c;
  if (!j.is_object()) throw DataError("ingestion config must be a JSON object");
  c.id_col = j.value("id_col", std::string("id"));
  if (j.contains("lon_col") && !j["lon_col"].is_null()) c.lon_col = j["lon_col"].get<std::string>();
  if (j.contains("lat_col") && !j["lat_col"].is_null()) c.lat_col = j["lat_col"].get<std::string>();
  if (c.lon_col.has_value() != c.lat_col.has_value()) {
    throw DataError("lon_col and lat_col must be given together");
  }
  if (!j.contains("covariates") || !j.contains("responses")) {
    throw DataError("ingestion config requires 'covariates' and 'responses'");
  }
  c.covariates = j["covariates"].get<std::vector<std::string>>();
  c.responses = j["responses"].get<std::vector<std::string>>();
  c.missing_token = j.value("missing_token", std::string("NA"));
  if (j.contains("transforms")) {
    const auto& t = j["transforms"];
    if (t.contains("responses")) c.response_transforms = parse_transform_list(t["responses"], c.responses, "response");
    if (t.contains("covariates")) c.covariate_transforms = parse_transform_list(t["covariates"], c.covariates, "covariate");
    c.standardize = t.value("standardize", true);
  }
  return c;
}

nlohmann::json to_json(const IngestConfig& c) {
  nlohmann::json j;
  j["id_col"] = c.id_col;
  j["lon_col"] = c.lon_col ? nlohmann::json(*c.lon_col) : nlohmann::json(nullptr);
  j["lat_col"] = c.lat_col ? nlohmann::json(*c.lat_col) : nlohmann::json(nullptr);
  j["covariates"] = c.covariates;
  j["responses"] = c.responses;
  j["missing_token"] = c.missing_token;
  nlohmann::json t;
  if (c.response_transforms) {
    std::vector<std::string> tags;
    for (auto r : *c.response_transforms) tags.push_back(to_string(r));
    t["responses"] = tags;
  }
  if (!c.covariate_transforms.empty()) {
    std::vector<std::string> tags;
    for (auto r : c.covariate_transforms) tags.push_back(to_string(r));
    t["covariates"] = tags;
  }
  t["standardize"] = c.standardize;
  j["transforms"] = t;
  return j;
}

Dataset parse_csv(const std::string& text, const IngestConfig& config) {
  const csv::Table table = csv::parse(text);
  if (config.covariates.empty() && config.responses.empty()) {
    throw DataError("ingestion config lists no covariates or responses");
  }
  const std::size_t id_idx = table.require_column(config.id_col);
  std::optional<std::size_t> lon_idx, lat_idx;
  if (config.lon_col) lon_idx = table.require_column(*config.lon_col);
  if (config.lat_col) lat_idx = table.require_column(*config.lat_col);
  std::vector<std::size_t> cov_idx, resp_idx;
  for (const auto& c : config.covariates) cov_idx.push_back(table.require_column(c));
  for (const auto& r : config.responses) resp_idx.push_back(table.require_column(r));

  const auto l = static_cast<Index>(table.rows.size());
  const auto q = static_cast<Index>(cov_idx.size()) + 1;
  const auto n = static_cast<Index>(resp_idx.size());

  Dataset d;
  d.X.resize(l, q);
  d.Y.resize(l, n);
  d.mask.resize(l, n);
  d.covariate_names.push_back("(Intercept)");
  for (const auto& c : config.covariates) d.covariate_names.push_back(c);
  d.response_names = config.responses;
  if (lon_idx) d.coords.emplace();

  auto is_missing = [&](const std::string& s) { return s.empty() || s == config.missing_token; };
  std::set<std::string> seen;
  for (Index i = 0; i < l; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const long line = table.line_numbers[static_cast<std::size_t>(i)];
    const std::string& id = row[id_idx];
    if (id.empty()) throw DataError("line " + std::to_string(line) + ": empty id", line);
    if (!seen.insert(id).second) throw DataError("line " + std::to_string(line) + ": duplicate id '" + id + "'", line);
    d.ids.push_back(id);
    if (lon_idx) {
      auto lon = csv::parse_double(row[*lon_idx]);
      auto lat = csv::parse_double(row[*lat_idx]);
      if (!lon || !lat) {
        throw DataError("line " + std::to_string(line) + ": non-numeric coordinate", line,
                        static_cast<long>(lon ? *lat_idx : *lon_idx) + 1);
      }
      d.coords->push_back({*lon, *lat});
    }
    d.X(i, 0) = 1.0;
    for (std::size_t c = 0; c < cov_idx.size(); ++c) {
      const std::string& cell = row[cov_idx[c]];
      const long col = static_cast<long>(cov_idx[c]) + 1;
      if (is_missing(cell)) {
        throw DataError("line " + std::to_string(line) + ", column '" + config.covariates[c] +
                            "': missing covariate values are not supported",
                        line, col);
      }
      auto v = csv::parse_double(cell);
      if (!v || !std::isfinite(*v)) {
        throw DataError("line " + std::to_string(line) + ", column '" + config.covariates[c] +
                            "': non-numeric value '" + cell + "'",
                        line, col);
      }
      d.X(i, static_cast<Index>(c) + 1) = *v;
    }
    for (std::size_t c = 0; c < resp_idx.size(); ++c) {
      const std::string& cell = row[resp_idx[c]];
      const long col = static_cast<long>(resp_idx[c]) + 1;
      if (is_missing(cell)) {
        d.Y(i, static_cast<Index>(c)) = kNaN;
        d.mask(i, static_cast<Index>(c)) = false;
        continue;
      }
      auto v = csv::parse_double(cell);
      if (!v || !std::isfinite(*v)) {
        throw DataError("line " + std::to_string(line) + ", column '" + config.responses[c] +
                            "': non-numeric value '" + cell + "'",
                        line, col);
      }
      d.Y(i, static_cast<Index>(c)) = *v;
      d.mask(i, static_cast<Index>(c)) = true;
    }
  }
  validate(d);
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const IngestConfig& config) {
  return parse_csv(csv::read_text(path), config);
}

std::string to_csv(const Dataset& d, const IngestConfig& config) {
  std::vector<std::string> header{config.id_col};
  const bool coords = d.coords.has_value();
  if (coords) {
    header.push_back(config.lon_col.value_or("lon"));
    header.push_back(config.lat_col.value_or("lat"));
  }
  for (Index c = 1; c < d.num_covariates(); ++c) header.push_back(d.covariate_names[static_cast<std::size_t>(c)]);
  for (const auto& r : d.response_names) header.push_back(r);
  std::string out = csv::join_row(header) + "\n";
  std::vector<std::string> fields;
  for (Index i = 0; i < d.rows(); ++i) {
    fields.clear();
    fields.push_back(d.ids[static_cast<std::size_t>(i)]);
    if (coords) {
      fields.push_back(format_double((*d.coords)[static_cast<std::size_t>(i)].lon));
      fields.push_back(format_double((*d.coords)[static_cast<std::size_t>(i)].lat));
    }
    for (Index c = 1; c < d.num_covariates(); ++c) fields.push_back(format_double(d.X(i, c)));
    for (Index c = 0; c < d.num_responses(); ++c) {
      fields.push_back(d.mask(i, c) ? format_double(d.Y(i, c)) : config.missing_token);
    }
    out += csv::join_row(fields);
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Dataset& d, const std::filesystem::path& path, const IngestConfig& config) {
  csv::write_atomic(path, to_csv(d, config));
}

// -- transforms --------------------------------------------------------------

namespace {

double forward(Transform t, double v, const char* kind, Index row, Index col) {
  switch (t) {
    case Transform::none: return v;
    case Transform::log:
      if (!(v > 0.0)) {
        throw DataError(std::string("log transform of non-positive ") + kind + " value " + format_double(v) +
                            " at row " + std::to_string(row) + ", column " + std::to_string(col),
                        static_cast<long>(row), static_cast<long>(col));
      }
      return std::log(v);
    case Transform::log1p:
      if (!(v > -1.0)) {
        throw DataError(std::string("log1p transform of value <= -1 in ") + kind + " at row " +
                            std::to_string(row) + ", column " + std::to_string(col),
                        static_cast<long>(row), static_cast<long>(col));
      }
      return std::log1p(v);
  }
  return v;
}

double backward(Transform t, double v) {
  switch (t) {
    case Transform::none: return v;
    case Transform::log: return std::exp(v);
    case Transform::log1p: return std::expm1(v);
  }
  return v;
}

}  // namespace

TransformResult apply_transforms(const Dataset& d, const TransformSpec& spec) {
  const Index p = d.num_covariates() - 1;
  const Index n = d.num_responses();
  if (!spec.covariate.empty() && static_cast<Index>(spec.covariate.size()) != p) {
    throw DataError("covariate transform count does not match covariates");
  }
  if (!spec.response.empty() && static_cast<Index>(spec.response.size()) != n) {
    throw DataError("response transform count does not match responses");
  }
  if (!spec.standardize.empty() && static_cast<Index>(spec.standardize.size()) != p) {
    throw DataError("standardize flag count does not match covariates");
  }
  TransformResult out{d, {spec, Vector::Zero(p), Vector::Ones(p)}};
  Dataset& t = out.data;
  for (Index c = 0; c < p; ++c) {
    const Transform tr = spec.covariate.empty() ? Transform::none : spec.covariate[static_cast<std::size_t>(c)];
    if (tr == Transform::none) continue;
    for (Index i = 0; i < t.rows(); ++i) t.X(i, c + 1) = forward(tr, d.X(i, c + 1), "covariate", i, c + 1);
  }
  for (Index c = 0; c < n; ++c) {
    const Transform tr = spec.response.empty() ? Transform::none : spec.response[static_cast<std::size_t>(c)];
    if (tr == Transform::none) continue;
    for (Index i = 0; i < t.rows(); ++i) {
      if (d.mask(i, c)) t.Y(i, c) = forward(tr, d.Y(i, c), "response", i, c);
    }
  }
  for (Index c = 0; c < p; ++c) {
    if (spec.standardize.empty() || !spec.standardize[static_cast<std::size_t>(c)]) continue;
    auto col = t.X.col(c + 1);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(col.size() - 1));
    if (!(sd > 0.0)) {
      throw DataError("cannot standardize constant covariate '" + d.covariate_names[static_cast<std::size_t>(c + 1)] + "'",
                      -1, static_cast<long>(c + 1));
    }
    col = (col.array() - mean) / sd;
    out.fitted.center(c) = mean;
    out.fitted.scale(c) = sd;
  }
  return out;
}

Dataset invert_transforms(const Dataset& d, const FittedTransform& fitted) {
  Dataset out = d;
  const Index p = d.num_covariates() - 1;
  for (Index c = 0; c < p; ++c) {
    const bool standardized = !fitted.spec.standardize.empty() && fitted.spec.standardize[static_cast<std::size_t>(c)];
    if (standardized) {
      out.X.col(c + 1) = out.X.col(c + 1).array() * fitted.scale(c) + fitted.center(c);
    }
    const Transform tr = fitted.spec.covariate.empty() ? Transform::none : fitted.spec.covariate[static_cast<std::size_t>(c)];
    if (tr != Transform::none) out.X.col(c + 1) = out.X.col(c + 1).unaryExpr([tr](double v) { return backward(tr, v); });
  }
  for (Index c = 0; c < d.num_responses(); ++c) {
    const Transform tr = fitted.spec.response.empty() ? Transform::none : fitted.spec.response[static_cast<std::size_t>(c)];
    if (tr == Transform::none) continue;
    for (Index i = 0; i < d.rows(); ++i) {
      if (d.mask(i, c)) out.Y(i, c) = backward(tr, d.Y(i, c));
    }
  }
  return out;
}

// -- status ------------------------------------------------------------------

std::string to_string(Status s) {
  switch (s) {
    case Status::full: return "full";
    case Status::partial: return "partial";
    case Status::missing: return "missing";
  }
  return "missing";
}

Status row_status(const Mask& mask, Index row) {
  const Index observed = mask.row(row).count();
  if (observed == mask.cols()) return Status::full;
  if (observed == 0) return Status::missing;
  return Status::partial;
}

StatusPartition partition_by_status(const Dataset& d) {
  StatusPartition p;
  for (Index i = 0; i < d.mask.rows(); ++i) {
    switch (row_status(d.mask, i)) {
      case Status::full: p.fully_observed.push_back(i); break;
      case Status::partial: p.partially_observed.push_back(i); break;
      case Status::missing: p.unobserved.push_back(i); break;
    }
  }
  return p;
}

IndexSet observed_rows(const Dataset& d) {
  IndexSet rows;
  for (Index i = 0; i < d.mask.rows(); ++i) {
    if (d.mask.row(i).any()) rows.push_back(i);
  }
  return rows;
}

// -- synthetic data ----------------------------------------------------------

namespace {

Matrix matrix_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw DataError(std::string(what) + " must be a non-empty array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Index>(row.size()) != cols) throw DataError(std::string(what) + " has ragged rows");
    for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

}  // namespace

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  GeneratorConfig g;
  g.l = j.value("l", g.l);
  g.n = j.value("n", g.n);
  g.q = j.value("q", g.q);
  if (j.contains("B")) g.B = matrix_from_json(j["B"], "B");
  if (j.contains("Sigma")) g.Sigma = matrix_from_json(j["Sigma"], "Sigma");
  if (j.contains("missing_prob")) {
    if (j["missing_prob"].is_number()) {
      g.missing_prob.assign(static_cast<std::size_t>(g.n), j["missing_prob"].get<double>());
    } else {
      g.missing_prob = j["missing_prob"].get<std::vector<double>>();
    }
  }
  g.unobserved_prob = j.value("unobserved_prob", g.unobserved_prob);
  g.planted_high_leverage = j.value("planted_high_leverage", g.planted_high_leverage);
  g.planted_scale = j.value("planted_scale", g.planted_scale);
  return g;
}

nlohmann::json to_json(const TruthRecord& t) {
  nlohmann::json j;
  j["B"] = matrix_to_json(t.B);
  j["Sigma"] = matrix_to_json(t.Sigma);
  j["seed"] = t.seed;
  j["planted_rows"] = t.planted_rows;
  return j;
}

std::pair<Dataset, TruthRecord> synthesize(const GeneratorConfig& gen, std::uint64_t seed) {
  const Index l = gen.l, n = gen.n, q = gen.q;
  if (n < 1 || q < 1 || l < q + 2) throw DataError("generator needs n >= 1, q >= 1 and l >= q + 2");
  Matrix sigma = gen.Sigma.size() ? gen.Sigma : Matrix::Identity(n, n);
  if (sigma.rows() != n || sigma.cols() != n) throw DataError("generator Sigma must be n x n");
  if (relative_asymmetry(sigma) > 1e-12) throw DataError("generator Sigma is not symmetric");
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw DataError("generator Sigma is not positive definite");
  const Matrix sigma_chol = llt.matrixL();

  std::vector<double> miss = gen.missing_prob;
  if (miss.empty()) miss.assign(static_cast<std::size_t>(n), 0.0);
  if (static_cast<Index>(miss.size()) != n) throw DataError("missing_prob needs one entry per response");
  for (double p : miss) {
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("missingness probability outside [0, 1]");
  }
  if (!(gen.unobserved_prob >= 0.0 && gen.unobserved_prob <= 1.0)) {
    throw DataError("unobserved probability outside [0, 1]");
  }
  if (gen.planted_high_leverage < 0 || gen.planted_high_leverage > l) {
    throw DataError("planted_high_leverage must lie in [0, l]");
  }

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Matrix b = gen.B;
  if (b.size() == 0) {
    b.resize(n, q);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < q; ++c) b(r, c) = 2.0 * unif(rng) - 1.0;
  }
  if (b.rows() != n || b.cols() != q) throw DataError("generator B must be n x q");

  Dataset d;
  d.X.resize(l, q);
  d.Y.resize(l, n);
  d.mask.resize(l, n);
  d.coords.emplace();
  d.covariate_names.push_back("(Intercept)");
  for (Index c = 1; c < q; ++c) d.covariate_names.push_back("x" + std::to_string(c));
  for (Index r = 0; r < n; ++r) d.response_names.push_back("y" + std::to_string(r + 1));

  TruthRecord truth{b, sigma, seed, {}};
  const Index planted = gen.planted_high_leverage;
  for (Index k = 0; k < planted; ++k) truth.planted_rows.push_back((k * l) / planted);

  std::size_t next_planted = 0;
  Vector z(n);
  for (Index i = 0; i < l; ++i) {
    d.ids.push_back("s" + std::to_string(i + 1));
    d.coords->push_back({-97.0 + 30.0 * unif(rng), 36.0 + 13.0 * unif(rng)});
    d.X(i, 0) = 1.0;
    for (Index c = 1; c < q; ++c) d.X(i, c) = normal(rng);
    if (next_planted < truth.planted_rows.size() && truth.planted_rows[next_planted] == i) {
      d.X.row(i).tail(q - 1) *= gen.planted_scale;
      ++next_planted;
    }
    for (Index r = 0; r < n; ++r) z(r) = normal(rng);
    d.Y.row(i) = (b * d.X.row(i).transpose() + sigma_chol * z).transpose();
    const bool unobserved = unif(rng) < gen.unobserved_prob;
    for (Index r = 0; r < n; ++r) {
      const bool missing = unif(rng) < miss[static_cast<std::size_t>(r)];
      d.mask(i, r) = !(unobserved || missing);
      if (!d.mask(i, r)) d.Y(i, r) = kNaN;
    }
  }
  validate(d);
  return {std::move(d), std::move(truth)};
}

IngestConfig synthetic_ingest_config(const Dataset& d) {
  IngestConfig c;
  c.id_col = "id";
  if (d.coords) {
    c.lon_col = "lon";
    c.lat_col = "lat";
  }
  c.covariates.assign(d.covariate_names.begin() + 1, d.covariate_names.end());
  c.responses = d.response_names;
  c.response_transforms = std::vector<Transform>(d.response_names.size(), Transform::none);
  c.standardize = false;
  return c;
}

}  // namespace extrapolmv
