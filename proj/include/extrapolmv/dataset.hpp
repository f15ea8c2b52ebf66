#pragma once

#include "extrapolmv/common.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace extrapolmv {

using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct Coordinate {
  double lon = 0.0;
  double lat = 0.0;
};

/// Tabular multivariate-response data. Row i of X is x_i' with an intercept in
/// column 0; Y holds NaN wherever mask is false.
struct Dataset {
  std::vector<std::string> ids;
  std::optional<std::vector<Coordinate>> coords;
  Matrix X;
  Matrix Y;
  Mask mask;
  std::vector<std::string> response_names;
  std::vector<std::string> covariate_names;  // includes "(Intercept)" first

  Index rows() const { return X.rows(); }
  Index num_covariates() const { return X.cols(); }
  Index num_responses() const { return Y.cols(); }
};

/// Throws DataError unless the Dataset invariants hold: consistent shapes,
/// intercept column, finite covariates, l >= q + 2, full column rank.
void validate(const Dataset& d);

/// True when X'X admits a Cholesky factorization and X has numerical rank q.
bool has_full_column_rank(const Matrix& x);

/// Deterministic digest over ids, X, Y and mask.
std::string dataset_hash(const Dataset& d);

// -- ingestion ---------------------------------------------------------------

enum class Transform { none, log, log1p };

Transform parse_transform(const std::string& tag);
std::string to_string(Transform t);

/// Covariate transforms are indexed over non-intercept columns; response
/// transforms over responses. Empty vectors mean "none everywhere".
struct TransformSpec {
  std::vector<Transform> covariate;
  std::vector<Transform> response;
  std::vector<bool> standardize;
};

struct IngestConfig {
  std::string id_col = "id";
  std::optional<std::string> lon_col;
  std::optional<std::string> lat_col;
  std::vector<std::string> covariates;
  std::vector<std::string> responses;
  std::string missing_token = "NA";
  /// Unset until the config states response transforms explicitly.
  std::optional<std::vector<Transform>> response_transforms;
  std::vector<Transform> covariate_transforms;
  bool standardize = true;

  TransformSpec transform_spec() const;
};

IngestConfig ingest_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IngestConfig& c);

Dataset load_csv(const std::filesystem::path& path, const IngestConfig& config);
Dataset parse_csv(const std::string& text, const IngestConfig& config);

/// Mirrors the input schema named by `config`; 17 significant digits.
std::string to_csv(const Dataset& d, const IngestConfig& config);
void write_csv(const Dataset& d, const std::filesystem::path& path, const IngestConfig& config);

// -- transforms --------------------------------------------------------------

/// Constants needed to undo apply_transforms.
struct FittedTransform {
  TransformSpec spec;
  Vector center;  // per non-intercept covariate; 0 where not standardized
  Vector scale;   // per non-intercept covariate; 1 where not standardized
};

struct TransformResult {
  Dataset data;
  FittedTransform fitted;
};

/// Applies per-column log/log1p, then standardizes flagged covariates to mean
/// 0 and sample standard deviation 1. Missing response cells are skipped.
TransformResult apply_transforms(const Dataset& d, const TransformSpec& spec);
Dataset invert_transforms(const Dataset& d, const FittedTransform& fitted);

// -- response status ---------------------------------------------------------

enum class Status { full, partial, missing };
std::string to_string(Status s);

struct StatusPartition {
  IndexSet fully_observed;
  IndexSet partially_observed;
  IndexSet unobserved;
};

Status row_status(const Mask& mask, Index row);
StatusPartition partition_by_status(const Dataset& d);

/// Rows with at least one observed response, in ascending order.
IndexSet observed_rows(const Dataset& d);

// -- synthetic data ----------------------------------------------------------

struct GeneratorConfig {
  Index l = 200;
  Index n = 4;
  Index q = 6;
  /// n x q; empty means draw entries uniformly from [-1, 1].
  Matrix B;
  /// n x n; empty means identity.
  Matrix Sigma;
  /// Per-response probability that a cell is unobserved; empty means 0.
  std::vector<double> missing_prob;
  /// Probability that a row has no observed response at all.
  double unobserved_prob = 0.0;
  /// Rows whose covariates are pushed far from the bulk.
  Index planted_high_leverage = 0;
  double planted_scale = 8.0;
};

struct TruthRecord {
  Matrix B;
  Matrix Sigma;
  std::uint64_t seed = 0;
  IndexSet planted_rows;
};

GeneratorConfig generator_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TruthRecord& t);

/// Deterministic given (gen, seed). Covariates are iid N(0, 1); planted rows
/// are scaled by planted_scale. Coordinates are uniform over a lon/lat box.
std::pair<Dataset, TruthRecord> synthesize(const GeneratorConfig& gen, std::uint64_t seed);

/// Ingestion config that reads back a synthesized dataset written by to_csv.
IngestConfig synthetic_ingest_config(const Dataset& d);

}  // namespace extrapolmv
