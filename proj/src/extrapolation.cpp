#include "extrapolmv/extrapolation.hpp"

#include "extrapolmv/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

namespace extrapolmv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSymmetryTol = 1e-10;

double divisor_value(Index count, VarianceDivisor divisor) {
  return divisor == VarianceDivisor::draws ? static_cast<double>(count) : static_cast<double>(count - 1);
}

/// Two-pass covariance of the rows of `draws`.
Matrix row_covariance(const Matrix& draws, VarianceDivisor divisor) {
  const Vector mean = draws.colwise().mean().transpose();
  const Matrix centered = draws.rowwise() - mean.transpose();
  Matrix cov = centered.transpose() * centered / divisor_value(draws.rows(), divisor);
  return 0.5 * (cov + cov.transpose());
}

void run_parallel(Index count, int threads, const std::function<void(Index, Index)>& body) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::max<Index>(count, 1))));
  if (workers == 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const Index chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const Index begin = std::min<Index>(count, w * chunk);
    const Index end = std::min<Index>(count, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

// -- predictive variance -------------------------------------------------------

PredictiveVariance make_predictive_variance(Matrix v) {
  PredictiveVariance pv;
  pv.V = std::move(v);
  pv.trace = mvpv_trace(pv.V);
  pv.logdet = mvpv_logdet(pv.V);
  pv.det = std::isinf(pv.logdet) ? 0.0 : std::exp(pv.logdet);
  return pv;
}

PredictiveVariance predictive_variance(const Matrix& mu_draws, VarianceDivisor divisor) {
  if (mu_draws.rows() < 2) throw std::invalid_argument("predictive_variance needs at least 2 draws");
  return make_predictive_variance(row_covariance(mu_draws, divisor));
}

double mvpv_trace(const Matrix& v) {
  if (relative_asymmetry(v) > kSymmetryTol) throw std::invalid_argument("predictive variance matrix is not symmetric");
  return v.trace();
}

double mvpv_logdet(const Matrix& v) {
  if (relative_asymmetry(v) > kSymmetryTol) throw std::invalid_argument("predictive variance matrix is not symmetric");
  return logdet_psd(v);
}

PredictiveVariance analytic_predictive_variance(const DesignFactor& design, const Matrix& sigma_hat, const Vector& x) {
  return make_predictive_variance(design.quadratic(x) * sigma_hat);
}

Matrix residual_covariance(const Dataset& d) {
  const StatusPartition part = partition_by_status(d);
  const auto lf = static_cast<Index>(part.fully_observed.size());
  const Index q = d.num_covariates();
  if (lf <= q) throw DataError("residual covariance needs more fully observed rows than covariates");
  Matrix x(lf, q), y(lf, d.num_responses());
  for (Index k = 0; k < lf; ++k) {
    x.row(k) = d.X.row(part.fully_observed[static_cast<std::size_t>(k)]);
    y.row(k) = d.Y.row(part.fully_observed[static_cast<std::size_t>(k)]);
  }
  const Matrix beta = x.colPivHouseholderQr().solve(y);
  const Matrix e = y - x * beta;
  Matrix s = e.transpose() * e / static_cast<double>(lf - q);
  return 0.5 * (s + s.transpose());
}

// -- conditional predictive variance ------------------------------------------

double cmvpv(const PosteriorDraws& p, const Vector& x, Index target, const Vector& values,
             const std::vector<bool>& available, CmvpvVariant variant, VarianceDivisor divisor) {
  if (x.size() != p.q) throw std::invalid_argument("cmvpv: covariate row has the wrong length");
  if (values.size() != p.n || static_cast<Index>(available.size()) != p.n) {
    throw std::invalid_argument("cmvpv: conditioning values must have one entry per response");
  }
  if (target < 0 || target >= p.n) throw std::invalid_argument("cmvpv: target response out of range");
  if (p.size() < 2) throw std::invalid_argument("cmvpv needs at least 2 draws");
  IndexSet given;
  for (Index c = 0; c < p.n; ++c) {
    if (c != target && available[static_cast<std::size_t>(c)]) given.push_back(c);
  }
  Vector given_values(static_cast<Index>(given.size()));
  for (std::size_t k = 0; k < given.size(); ++k) given_values(static_cast<Index>(k)) = values(given[k]);

  Matrix means(static_cast<Index>(p.size()), 1);
  double within = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p.B[a].rows() != p.n || p.Sigma[a].rows() != p.n) throw std::invalid_argument("cmvpv: draw dimension mismatch");
    const ConditionalMoments m = conditional_mvn(p.B[a] * x, p.Sigma[a], {target}, given, given_values);
    means(static_cast<Index>(a), 0) = m.mean(0);
    within += m.cov(0, 0);
  }
  const double across = row_covariance(means, divisor)(0, 0);
  if (variant == CmvpvVariant::mean_only) return across;
  return across + within / static_cast<double>(p.size());
}

// -- cutoffs ---------------------------------------------------------------------

std::string CutoffSpec::name() const {
  switch (kind) {
    case Kind::max: return "max";
    case Kind::leverage_informed_max: return "lev";
    case Kind::quantile: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "q%g", level * 100.0);
      return buf;
    }
  }
  return "max";
}

CutoffSpec CutoffSpec::parse(const std::string& text) {
  if (text == "max") return maximum();
  if (text == "lev") return leverage();
  std::optional<double> level;
  if (text.rfind("q:", 0) == 0) {
    level = csv::parse_double(text.substr(2));
  } else if (text.size() > 1 && text[0] == 'q') {
    if (auto pct = csv::parse_double(text.substr(1))) level = *pct / 100.0;
  }
  if (!level) throw std::invalid_argument("unknown cutoff '" + text + "' (expected max, lev, q99, q95 or q:<r>)");
  if (!(*level > 0.0 && *level <= 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1]");
  return quantile(*level);
}

std::vector<CutoffSpec> default_cutoffs() {
  return {CutoffSpec::maximum(), CutoffSpec::leverage(), CutoffSpec::quantile(0.99), CutoffSpec::quantile(0.95)};
}

namespace {

// Quantile position into sorted values, as (lower index, fraction).
std::pair<std::size_t, double> quantile_position(std::size_t count, double r) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1]");
  const double pos = r * static_cast<double>(count - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo >= count - 1) return {count - 1, 0.0};
  return {lo, pos - static_cast<double>(lo)};
}

double log_space_interpolate(double lo, double hi, double frac) {
  if (frac == 0.0) return lo;
  if (hi == -kInf) return -kInf;
  if (lo == -kInf) return std::log(frac) + hi;
  return lo + std::log1p(frac * std::expm1(hi - lo));
}

}  // namespace

double empirical_quantile(std::vector<double> values, double r) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
  std::sort(values.begin(), values.end());
  const auto [lo, frac] = quantile_position(values.size(), r);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double compute_cutoff(std::span<const double> v_obs, const CutoffSpec& spec, const Vector* leverage, ValueScale scale) {
  if (v_obs.empty()) throw std::invalid_argument("compute_cutoff: no observed values");
  switch (spec.kind) {
    case CutoffSpec::Kind::max: return *std::max_element(v_obs.begin(), v_obs.end());
    case CutoffSpec::Kind::leverage_informed_max: {
      if (!leverage || leverage->size() != static_cast<Index>(v_obs.size())) {
        throw std::invalid_argument("leverage-informed cutoff needs leverages aligned with the observed values");
      }
      const IndexSet flagged = high_leverage_set(*leverage, spec.rule);
      std::vector<char> drop(v_obs.size(), 0);
      for (Index i : flagged) drop[static_cast<std::size_t>(i)] = 1;
      double k = -kInf;
      bool any = false;
      for (std::size_t i = 0; i < v_obs.size(); ++i) {
        if (drop[i]) continue;
        k = any ? std::max(k, v_obs[i]) : v_obs[i];
        any = true;
      }
      if (!any) throw std::invalid_argument("leverage rule removed every observed location");
      return k;
    }
    case CutoffSpec::Kind::quantile: {
      if (scale == ValueScale::linear) return empirical_quantile({v_obs.begin(), v_obs.end()}, spec.level);
      std::vector<double> sorted(v_obs.begin(), v_obs.end());
      std::sort(sorted.begin(), sorted.end());
      const auto [lo, frac] = quantile_position(sorted.size(), spec.level);
      if (frac == 0.0) return sorted[lo];
      return log_space_interpolate(sorted[lo], sorted[lo + 1], frac);
    }
  }
  throw std::invalid_argument("unknown cutoff kind");
}

int extrapolation_index(double v, double k) { return v > k ? 1 : 0; }

double rmvpv(double v, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("rmvpv requires a positive cutoff");
  return v / k;
}

// -- measures --------------------------------------------------------------------

std::string Measure::key() const {
  switch (kind) {
    case Kind::trace: return "trace";
    case Kind::det: return "det";
    case Kind::cmvpv: return "cmvpv_" + response_name;
  }
  return "det";
}

std::string Measure::label() const {
  switch (kind) {
    case Kind::trace: return "MVPV-tr";
    case Kind::det: return "MVPV-D";
    case Kind::cmvpv: return "CMVPV:" + response_name;
  }
  return "MVPV-D";
}

Measure Measure::parse(const std::string& text, const std::vector<std::string>& response_names) {
  if (text == "trace" || text == "tr") return {Kind::trace, -1, {}};
  if (text == "det" || text == "D") return {Kind::det, -1, {}};
  std::string name;
  if (text.rfind("cmvpv:", 0) == 0) name = text.substr(6);
  else if (text.rfind("cmvpv_", 0) == 0) name = text.substr(6);
  else throw std::invalid_argument("unknown measure '" + text + "' (expected trace, det or cmvpv:<response>)");
  auto it = std::find(response_names.begin(), response_names.end(), name);
  if (it == response_names.end()) throw std::invalid_argument("measure references unknown response '" + name + "'");
  return {Kind::cmvpv, static_cast<Index>(it - response_names.begin()), name};
}

std::size_t MeasureReport::flag_count(std::size_t cutoff) const {
  const auto& e = cutoffs.at(cutoff).e;
  return static_cast<std::size_t>(std::count(e.begin(), e.end(), 1));
}

const MeasureReport* ExtrapolationReport::find(const std::string& key) const {
  for (const auto& m : measures)
    if (m.measure.key() == key) return &m;
  return nullptr;
}

void assign_first_flagging(MeasureReport& m) {
  std::vector<std::size_t> order(m.cutoffs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m.cutoffs[a].k > m.cutoffs[b].k; });
  m.first_flagging.assign(m.value.size(), std::nullopt);
  for (std::size_t i = 0; i < m.value.size(); ++i) {
    for (std::size_t c : order) {
      if (m.cutoffs[c].e[i]) {
        m.first_flagging[i] = c;
        break;
      }
    }
  }
}

namespace {

Matrix rows_of(const Matrix& x, const IndexSet& rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = x.row(rows[k]);
  return out;
}

/// Cutoffs, indices and ratios for one measure's values over all locations.
MeasureReport evaluate_measure(const Measure& measure, std::vector<double> values, const std::vector<double>& trace,
                               IndexSet observed, const Matrix& x, const std::vector<CutoffSpec>& cutoffs) {
  if (observed.empty()) {
    throw std::invalid_argument("measure " + measure.label() + " has no observed locations to derive cutoffs from");
  }
  const bool is_det = measure.kind == Measure::Kind::det;
  const ValueScale scale = is_det ? ValueScale::log : ValueScale::linear;
  MeasureReport m;
  m.measure = measure;
  m.value = std::move(values);
  m.observed = std::move(observed);

  std::vector<double> v_obs, t_obs;
  for (Index i : m.observed) {
    v_obs.push_back(m.value[static_cast<std::size_t>(i)]);
    t_obs.push_back(trace[static_cast<std::size_t>(i)]);
  }
  std::optional<Vector> leverage;
  for (const auto& c : cutoffs) {
    if (c.kind == CutoffSpec::Kind::leverage_informed_max && !leverage) leverage = hat_diagonal(rows_of(x, m.observed));
  }
  const Vector* lev = leverage ? &*leverage : nullptr;

  for (const auto& spec : cutoffs) {
    CutoffResult res;
    res.spec = spec;
    res.k = compute_cutoff(v_obs, spec, lev, scale);
    if (is_det) res.k_tiebreak = compute_cutoff(t_obs, spec, lev, ValueScale::linear);
    res.e.resize(m.value.size());
    res.r.resize(m.value.size());
    for (std::size_t i = 0; i < m.value.size(); ++i) {
      const double v = m.value[i];
      if (is_det) {
        const bool tied = v == -kInf && res.k == -kInf;
        res.e[i] = tied ? extrapolation_index(trace[i], res.k_tiebreak) : extrapolation_index(v, res.k);
        res.r[i] = res.k == -kInf ? kNaN : std::exp(v - res.k);
      } else {
        res.e[i] = extrapolation_index(v, res.k);
        res.r[i] = res.k > 0.0 ? rmvpv(v, res.k) : kNaN;
      }
    }
    m.cutoffs.push_back(std::move(res));
  }
  assign_first_flagging(m);
  return m;
}

ExtrapolationReport report_skeleton(const Dataset& d) {
  ExtrapolationReport r;
  r.ids = d.ids;
  r.coords = d.coords;
  for (Index i = 0; i < d.rows(); ++i) r.status.push_back(row_status(d.mask, i));
  r.mvpv_trace.resize(static_cast<std::size_t>(d.rows()));
  r.mvpv_logdet.resize(static_cast<std::size_t>(d.rows()));
  return r;
}

IndexSet rows_observing(const Dataset& d, Index response) {
  IndexSet rows;
  for (Index i = 0; i < d.rows(); ++i)
    if (d.mask(i, response)) rows.push_back(i);
  return rows;
}

/// Across-draw moments of the effective conditional-mean coefficients
/// w_a = [B_t - g_a B_G, g_a] and of the conditional variance, for one
/// (target, conditioning set) pair. The conditional mean at (x, values) is
/// w_a . [x; values].
struct PatternMoments {
  Matrix cov;
  double mean_within = 0.0;
};

PatternMoments pattern_moments(const PosteriorDraws& p, Index target, const IndexSet& given, VarianceDivisor divisor) {
  const auto g = static_cast<Index>(given.size());
  Matrix w(static_cast<Index>(p.size()), p.q + g);
  double within = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    const ConditionalGain cg = conditional_gain(p.Sigma[a], {target}, given);
    RowVector coef = p.B[a].row(target);
    for (Index k = 0; k < g; ++k) coef -= cg.gain(0, k) * p.B[a].row(given[static_cast<std::size_t>(k)]);
    w.row(static_cast<Index>(a)).head(p.q) = coef;
    if (g) w.row(static_cast<Index>(a)).tail(g) = cg.gain.row(0);
    within += cg.cov(0, 0);
  }
  return {row_covariance(w, divisor), within / static_cast<double>(p.size())};
}

}  // namespace

ExtrapolationReport score_locations(const PosteriorDraws& p, const Dataset& d, const std::vector<Measure>& measures,
                                    const std::vector<CutoffSpec>& cutoffs, const ScoreOptions& options) {
  if (p.q != d.num_covariates() || p.n != d.num_responses()) {
    throw std::invalid_argument("posterior draws do not match the dataset dimensions");
  }
  if (p.size() < 2) throw std::invalid_argument("scoring needs at least 2 posterior draws");
  const Index n = p.n, q = p.q, l = d.rows();
  ExtrapolationReport report = report_skeleton(d);

  // V_i = (I_n (x) x_i') C (I_n (x) x_i) with C the across-draw covariance of
  // the row-major vectorized coefficients; identical to the covariance of
  // mu^(a) = B^(a) x_i.
  Matrix vec_b(static_cast<Index>(p.size()), n * q);
  for (std::size_t a = 0; a < p.size(); ++a) {
    for (Index r = 0; r < n; ++r) vec_b.row(static_cast<Index>(a)).segment(r * q, q) = p.B[a].row(r);
  }
  const Matrix coef_cov = row_covariance(vec_b, options.divisor);
  run_parallel(l, options.threads, [&](Index begin, Index end) {
    Matrix v(n, n);
    for (Index i = begin; i < end; ++i) {
      const Vector x = d.X.row(i).transpose();
      for (Index r = 0; r < n; ++r)
        for (Index s = r; s < n; ++s) v(r, s) = v(s, r) = x.dot(coef_cov.block(r * q, s * q, q, q) * x);
      report.mvpv_trace[static_cast<std::size_t>(i)] = mvpv_trace(v);
      report.mvpv_logdet[static_cast<std::size_t>(i)] = mvpv_logdet(v);
    }
  });

  const IndexSet observed = observed_rows(d);
  for (const auto& measure : measures) {
    switch (measure.kind) {
      case Measure::Kind::trace:
        report.measures.push_back(evaluate_measure(measure, report.mvpv_trace, report.mvpv_trace, observed, d.X, cutoffs));
        break;
      case Measure::Kind::det:
        report.measures.push_back(evaluate_measure(measure, report.mvpv_logdet, report.mvpv_trace, observed, d.X, cutoffs));
        break;
      case Measure::Kind::cmvpv: {
        const Index t = measure.response;
        if (t < 0 || t >= n) throw std::invalid_argument("cmvpv measure targets an unknown response");
        std::map<IndexSet, PatternMoments> cache;
        std::vector<const PatternMoments*> row_pattern(static_cast<std::size_t>(l));
        std::vector<IndexSet> row_given(static_cast<std::size_t>(l));
        for (Index i = 0; i < l; ++i) {
          IndexSet given;
          for (Index c = 0; c < n; ++c)
            if (c != t && d.mask(i, c)) given.push_back(c);
          auto it = cache.find(given);
          if (it == cache.end()) it = cache.emplace(given, pattern_moments(p, t, given, options.divisor)).first;
          row_pattern[static_cast<std::size_t>(i)] = &it->second;
          row_given[static_cast<std::size_t>(i)] = std::move(given);
        }
        std::vector<double> values(static_cast<std::size_t>(l));
        for (Index i = 0; i < l; ++i) {
          const auto& given = row_given[static_cast<std::size_t>(i)];
          Vector z(q + static_cast<Index>(given.size()));
          z.head(q) = d.X.row(i).transpose();
          for (std::size_t k = 0; k < given.size(); ++k) z(q + static_cast<Index>(k)) = d.Y(i, given[k]);
          const PatternMoments& pm = *row_pattern[static_cast<std::size_t>(i)];
          double v = z.dot(pm.cov * z);
          if (options.cmvpv_variant == CmvpvVariant::total) v += pm.mean_within;
          values[static_cast<std::size_t>(i)] = v;
        }
        report.measures.push_back(evaluate_measure(measure, std::move(values), report.mvpv_trace, rows_observing(d, t), d.X, cutoffs));
        break;
      }
    }
  }
  return report;
}

ExtrapolationReport score_locations_analytic(const Dataset& d, const Matrix& sigma_hat,
                                             const std::vector<Measure>& measures,
                                             const std::vector<CutoffSpec>& cutoffs) {
  if (sigma_hat.rows() != d.num_responses() || sigma_hat.cols() != d.num_responses()) {
    throw std::invalid_argument("sigma_hat must be n x n");
  }
  ExtrapolationReport report = report_skeleton(d);
  const IndexSet observed = observed_rows(d);
  const DesignFactor design(rows_of(d.X, observed));
  for (Index i = 0; i < d.rows(); ++i) {
    const PredictiveVariance pv = analytic_predictive_variance(design, sigma_hat, d.X.row(i).transpose());
    report.mvpv_trace[static_cast<std::size_t>(i)] = pv.trace;
    report.mvpv_logdet[static_cast<std::size_t>(i)] = pv.logdet;
  }
  for (const auto& measure : measures) {
    if (measure.kind == Measure::Kind::trace) {
      report.measures.push_back(evaluate_measure(measure, report.mvpv_trace, report.mvpv_trace, observed, d.X, cutoffs));
    } else if (measure.kind == Measure::Kind::det) {
      report.measures.push_back(evaluate_measure(measure, report.mvpv_logdet, report.mvpv_trace, observed, d.X, cutoffs));
    } else {
      throw std::invalid_argument("analytic scoring supports trace and det measures only");
    }
  }
  return report;
}

// -- output ------------------------------------------------------------------------

namespace {

std::string cutoff_label(const MeasureReport& m, const std::optional<std::size_t>& c) {
  return c ? m.cutoffs[*c].spec.name() : "none";
}

}  // namespace

std::string scores_csv(const ExtrapolationReport& r) {
  std::vector<std::string> header{"id", "lon", "lat", "status", "mvpv_tr", "mvpv_logdet"};
  std::vector<const MeasureReport*> cmvpv_cols;
  for (const auto& m : r.measures) {
    if (m.measure.kind == Measure::Kind::cmvpv) {
      header.push_back(m.measure.key());
      cmvpv_cols.push_back(&m);
    }
  }
  for (std::size_t mi = 0; mi < r.measures.size(); ++mi) {
    const auto& m = r.measures[mi];
    const std::string prefix = mi == 0 ? "" : m.measure.key() + "_";
    for (const auto& c : m.cutoffs) {
      const std::string name = c.spec.name();
      header.push_back(prefix + "k_" + name);
      header.push_back(prefix + "e_" + name);
      header.push_back(prefix + "r_" + name);
    }
    header.push_back(prefix + "first_flagging_cutoff");
  }
  std::string out = csv::join_row(header) + "\n";
  std::vector<std::string> row;
  for (std::size_t i = 0; i < r.ids.size(); ++i) {
    row.clear();
    row.push_back(r.ids[i]);
    if (r.coords) {
      row.push_back(format_double((*r.coords)[i].lon));
      row.push_back(format_double((*r.coords)[i].lat));
    } else {
      row.emplace_back("NA");
      row.emplace_back("NA");
    }
    row.push_back(to_string(r.status[i]));
    row.push_back(format_double(r.mvpv_trace[i]));
    row.push_back(format_double(r.mvpv_logdet[i]));
    for (const auto* m : cmvpv_cols) row.push_back(format_double(m->value[i]));
    for (const auto& m : r.measures) {
      for (const auto& c : m.cutoffs) {
        row.push_back(format_double(c.k));
        row.push_back(std::to_string(c.e[i]));
        row.push_back(format_double(c.r[i]));
      }
      row.push_back(cutoff_label(m, m.first_flagging[i]));
    }
    out += csv::join_row(row);
    out.push_back('\n');
  }
  return out;
}

std::string plotdata_csv(const ExtrapolationReport& r) {
  std::string out = "id,lon,lat,first_flagging_cutoff\n";
  const MeasureReport* m = r.measures.empty() ? nullptr : &r.measures.front();
  for (std::size_t i = 0; i < r.ids.size(); ++i) {
    std::vector<std::string> row{r.ids[i]};
    if (r.coords) {
      row.push_back(format_double((*r.coords)[i].lon));
      row.push_back(format_double((*r.coords)[i].lat));
    } else {
      row.emplace_back("NA");
      row.emplace_back("NA");
    }
    row.push_back(m ? cutoff_label(*m, m->first_flagging[i]) : "none");
    out += csv::join_row(row);
    out.push_back('\n');
  }
  return out;
}

}  // namespace extrapolmv
