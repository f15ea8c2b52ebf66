#pragma once

#include "extrapolmv/common.hpp"
#include "extrapolmv/conditional.hpp"
#include "extrapolmv/dataset.hpp"
#include "extrapolmv/diagnostics.hpp"
#include "extrapolmv/sampler.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace extrapolmv {

// -- predictive variance -------------------------------------------------------

/// Divisor used for across-draw (co)variances. The default divides by the
/// number of draws A; A - 1 is available for cross-checks.
enum class VarianceDivisor { draws, draws_minus_one };

struct PredictiveVariance {
  std::string id;
  Matrix V;
  double trace = 0.0;
  double logdet = 0.0;  // -infinity when V is singular
  double det = 0.0;     // may underflow; logdet is authoritative
};

/// V = sum_a (mu_a - mean)(mu_a - mean)' / A over the rows of `mu_draws`
/// (A x n). Requires A >= 2.
PredictiveVariance predictive_variance(const Matrix& mu_draws, VarianceDivisor divisor = VarianceDivisor::draws);

/// Wraps an already computed V, filling trace/logdet/det.
PredictiveVariance make_predictive_variance(Matrix v);

/// Trace and log-determinant scalarizations. Both reject input whose
/// relative asymmetry exceeds 1e-10.
double mvpv_trace(const Matrix& v);
double mvpv_logdet(const Matrix& v);

/// Closed-form V(x) = x'(X'X)^{-1}x * sigma_hat for a known residual
/// covariance (no MCMC error).
PredictiveVariance analytic_predictive_variance(const DesignFactor& design, const Matrix& sigma_hat, const Vector& x);

/// Residual covariance E'E/(l - q) of the least-squares fit on fully observed rows.
Matrix residual_covariance(const Dataset& d);

// -- conditional predictive variance ------------------------------------------

enum class CmvpvVariant {
  total,         // Var_a(conditional mean) + Mean_a(conditional variance)
  mean_only,     // Var_a(conditional mean)
};

/// Conditional predictive variance of response `target` at covariates `x`,
/// conditioning on every other response flagged in `available` (their values
/// taken from `values`). With nothing available this reduces to
/// Var_a(mu_target) + Mean_a(Sigma[target, target]) for the total variant.
double cmvpv(const PosteriorDraws& p, const Vector& x, Index target, const Vector& values,
             const std::vector<bool>& available, CmvpvVariant variant = CmvpvVariant::total,
             VarianceDivisor divisor = VarianceDivisor::draws);

// -- cutoffs and indices ----------------------------------------------------------

struct CutoffSpec {
  enum class Kind { max, leverage_informed_max, quantile };
  Kind kind = Kind::max;
  double level = 1.0;  // quantile level in (0, 1]
  LeverageRule rule;   // for leverage_informed_max

  /// Column-friendly label: max, lev, q99, q95, q97.5 ...
  std::string name() const;
  /// Accepts max, lev, q99, q95, qNN and q:<r>.
  static CutoffSpec parse(const std::string& text);
  static CutoffSpec maximum() { return {}; }
  static CutoffSpec leverage(LeverageRule rule = {}) { return {Kind::leverage_informed_max, 1.0, rule}; }
  static CutoffSpec quantile(double r) { return {Kind::quantile, r, {}}; }
};

/// The four cutoffs explored by default: max, lev, q99, q95.
std::vector<CutoffSpec> default_cutoffs();

/// Linear interpolation between order statistics at position r (N - 1).
double empirical_quantile(std::vector<double> values, double r);

/// Whether measure values are stored as natural logs (determinants). Cutoffs
/// on that scale interpolate the underlying raw values, so a quantile of
/// log-determinants equals the log of the determinant quantile.
enum class ValueScale { linear, log };

/// k from the observed-location values. For leverage_informed_max,
/// `leverage` must align with `v_obs`; rows flagged by the rule are dropped.
double compute_cutoff(std::span<const double> v_obs, const CutoffSpec& spec,
                      const Vector* leverage = nullptr, ValueScale scale = ValueScale::linear);

/// 1 iff v > k.
int extrapolation_index(double v, double k);
/// v / k; requires k > 0.
double rmvpv(double v, double k);

// -- location scoring ---------------------------------------------------------------

struct Measure {
  enum class Kind { trace, det, cmvpv };
  Kind kind = Kind::det;
  Index response = -1;  // for cmvpv
  std::string response_name;

  /// trace, det, cmvpv_<response name>
  std::string key() const;
  /// MVPV-tr, MVPV-D, CMVPV:<response name>
  std::string label() const;
  static Measure parse(const std::string& text, const std::vector<std::string>& response_names);
};

struct CutoffResult {
  CutoffSpec spec;
  double k = 0.0;            // on the measure's value scale (log for det)
  double k_tiebreak = 0.0;   // trace cutoff used when det values tie at -infinity
  std::vector<int> e;        // per location
  std::vector<double> r;     // per location; NaN where k <= 0
};

struct MeasureReport {
  Measure measure;
  std::vector<double> value;     // log-determinant for det
  IndexSet observed;             // rows whose values define the cutoffs
  std::vector<CutoffResult> cutoffs;
  /// Index into `cutoffs` of the largest cutoff flagging the location.
  std::vector<std::optional<std::size_t>> first_flagging;

  std::size_t flag_count(std::size_t cutoff) const;
};

struct ExtrapolationReport {
  std::vector<std::string> ids;
  std::optional<std::vector<Coordinate>> coords;
  std::vector<Status> status;
  std::vector<double> mvpv_trace;
  std::vector<double> mvpv_logdet;
  std::vector<MeasureReport> measures;

  const MeasureReport* find(const std::string& key) const;
};

struct ScoreOptions {
  VarianceDivisor divisor = VarianceDivisor::draws;
  CmvpvVariant cmvpv_variant = CmvpvVariant::total;
  int threads = 1;
};

/// Orders cutoffs from largest to smallest k and assigns each location the
/// first one that flags it.
void assign_first_flagging(MeasureReport& m);

/// Scores every dataset row. MVPV cutoffs come from rows with any observed
/// response; CMVPV cutoffs for response t from rows where t is observed, each
/// conditioned on its own observed siblings.
ExtrapolationReport score_locations(const PosteriorDraws& p, const Dataset& d, const std::vector<Measure>& measures,
                                    const std::vector<CutoffSpec>& cutoffs, const ScoreOptions& options = {});

/// Same report with V_i = h(x_i) * sigma_hat in closed form, h from the
/// observed rows' design. Only trace and det measures are supported.
ExtrapolationReport score_locations_analytic(const Dataset& d, const Matrix& sigma_hat,
                                             const std::vector<Measure>& measures,
                                             const std::vector<CutoffSpec>& cutoffs);

/// scores.csv: id, lon, lat, status, mvpv_tr, mvpv_logdet, cmvpv_<resp>...,
/// then k_/e_/r_ per cutoff and first_flagging_cutoff for the first measure,
/// and the same block prefixed with "<key>_" for each further measure.
std::string scores_csv(const ExtrapolationReport& r);

/// plotdata.csv: id, lon, lat, first_flagging_cutoff (first measure).
std::string plotdata_csv(const ExtrapolationReport& r);

}  // namespace extrapolmv
