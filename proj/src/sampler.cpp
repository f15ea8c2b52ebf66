#include "extrapolmv/sampler.hpp"

#include "extrapolmv/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

namespace extrapolmv {

// -- ModelSpec -----------------------------------------------------------------

Matrix ModelSpec::resolved_scale(Index n) const { return iw_scale.size() ? iw_scale : Matrix::Identity(n, n); }

double ModelSpec::resolved_df(Index q) const { return iw_df.value_or(static_cast<double>(q + 1)); }

int ModelSpec::draws_per_chain() const { return (iterations - burn_in) / thin; }

void ModelSpec::validate(Index n, Index q) const {
  if (!(coef_prior_variance > 0.0)) throw std::invalid_argument("coefficient prior variance must be positive");
  if (iterations < 1) throw std::invalid_argument("iterations must be positive");
  if (burn_in < 0) throw std::invalid_argument("burn-in must be non-negative");
  if (burn_in >= iterations) {
    throw std::invalid_argument("burn-in (" + std::to_string(burn_in) + ") must be smaller than iterations (" +
                                std::to_string(iterations) + ")");
  }
  if (thin < 1) throw std::invalid_argument("thin must be positive");
  if (chains < 1) throw std::invalid_argument("chains must be positive");
  if (z_thin < 0) throw std::invalid_argument("z_thin must be non-negative");
  if (draws_per_chain() < 1) throw std::invalid_argument("no draws retained: thin exceeds iterations - burn-in");
  const Matrix scale = resolved_scale(n);
  if (scale.rows() != n || scale.cols() != n) throw std::invalid_argument("inverse-Wishart scale must be n x n");
  if (relative_asymmetry(scale) > 1e-12) throw std::invalid_argument("inverse-Wishart scale must be symmetric");
  if (Eigen::LLT<Matrix>(scale).info() != Eigen::Success) {
    throw std::invalid_argument("inverse-Wishart scale must be positive definite");
  }
  const double df = resolved_df(q);
  if (!(df > static_cast<double>(n - 1))) {
    throw std::invalid_argument("inverse-Wishart degrees of freedom must exceed n - 1 = " + std::to_string(n - 1));
  }
}

nlohmann::json to_json(const ModelSpec& s) {
  nlohmann::json j;
  j["coef_prior_variance"] = s.coef_prior_variance;
  if (s.iw_scale.size()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < s.iw_scale.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Index c = 0; c < s.iw_scale.cols(); ++c) row.push_back(s.iw_scale(r, c));
      rows.push_back(row);
    }
    j["iw_scale"] = rows;
  } else {
    j["iw_scale"] = "identity";
  }
  j["iw_df"] = s.iw_df ? nlohmann::json(*s.iw_df) : nlohmann::json("q+1");
  j["iterations"] = s.iterations;
  j["burn_in"] = s.burn_in;
  j["thin"] = s.thin;
  j["chains"] = s.chains;
  j["seed"] = s.seed;
  j["z_thin"] = s.z_thin;
  return j;
}

ModelSpec model_spec_from_json(const nlohmann::json& j, ModelSpec s) {
  if (!j.is_object()) throw std::invalid_argument("model spec must be a JSON object");
  s.coef_prior_variance = j.value("coef_prior_variance", s.coef_prior_variance);
  if (j.contains("iw_scale") && j["iw_scale"].is_array()) {
    const auto& rows = j["iw_scale"];
    const auto n = static_cast<Index>(rows.size());
    s.iw_scale.resize(n, n);
    for (Index r = 0; r < n; ++r) {
      if (static_cast<Index>(rows[static_cast<std::size_t>(r)].size()) != n) {
        throw std::invalid_argument("iw_scale must be square");
      }
      for (Index c = 0; c < n; ++c) s.iw_scale(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
  }
  if (j.contains("iw_df") && j["iw_df"].is_number()) s.iw_df = j["iw_df"].get<double>();
  s.iterations = j.value("iterations", s.iterations);
  s.burn_in = j.value("burn_in", s.burn_in);
  s.thin = j.value("thin", s.thin);
  s.chains = j.value("chains", s.chains);
  s.seed = j.value("seed", s.seed);
  s.z_thin = j.value("z_thin", s.z_thin);
  return s;
}

// -- kernels -------------------------------------------------------------------

Rng chain_rng(std::uint64_t seed, int chain) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chain), 0x9e3779b9u};
  return Rng(seq);
}

namespace {

Vector standard_normal(Index size, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(size);
  for (Index i = 0; i < size; ++i) z(i) = normal(rng);
  return z;
}

}  // namespace

CoefficientConditional coefficient_conditional(const Matrix& xtx, const Matrix& xty, const Matrix& sigma,
                                               double prior_variance) {
  const Index q = xtx.rows();
  const Index n = sigma.rows();
  if (xty.rows() != q || xty.cols() != n) throw std::invalid_argument("coefficient_conditional: X'Y must be q x n");
  Eigen::LLT<Matrix> sllt(sigma);
  if (sllt.info() != Eigen::Success) throw NumericalError("Sigma is not positive definite");
  const Matrix sigma_inv = sllt.solve(Matrix::Identity(n, n));
  CoefficientConditional c;
  c.precision.resize(q * n, q * n);
  for (Index r = 0; r < n; ++r)
    for (Index s = 0; s < n; ++s) c.precision.block(r * q, s * q, q, q) = sigma_inv(r, s) * xtx;
  c.precision.diagonal().array() += 1.0 / prior_variance;
  const Matrix rhs_mat = xty * sigma_inv;  // q x n
  const Vector rhs = Eigen::Map<const Vector>(rhs_mat.data(), q * n);
  Eigen::LLT<Matrix> pllt(c.precision);
  if (pllt.info() != Eigen::Success) throw NumericalError("coefficient precision is not positive definite");
  c.mean = pllt.solve(rhs);
  return c;
}

Matrix draw_coefficients(const Matrix& xtx, const Matrix& xty, const Matrix& sigma, double prior_variance,
                         Rng& rng) {
  const Index q = xtx.rows();
  const Index n = sigma.rows();
  const CoefficientConditional c = coefficient_conditional(xtx, xty, sigma, prior_variance);
  const Matrix l = cholesky_lower(c.precision, "coefficient precision is not positive definite");
  // beta = mean + L^{-T} z has covariance (L L')^{-1}.
  const Vector beta = c.mean + l.transpose().triangularView<Eigen::Upper>().solve(standard_normal(q * n, rng));
  return Eigen::Map<const Matrix>(beta.data(), q, n).transpose();
}

Matrix draw_inverse_wishart(const Matrix& scale, double df, Rng& rng) {
  const Index n = scale.rows();
  if (!(df > static_cast<double>(n - 1))) throw std::invalid_argument("inverse-Wishart df must exceed n - 1");
  const Matrix l_scale = cholesky_lower(scale, "inverse-Wishart scale is not positive definite");
  // W0 = A A' ~ Wishart(I, df); Sigma = L (A A')^{-1} L' ~ IW(L L', df).
  Matrix a = Matrix::Zero(n, n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    std::chi_squared_distribution<double> chi2(df - static_cast<double>(i));
    a(i, i) = std::sqrt(chi2(rng));
    for (Index j = 0; j < i; ++j) a(i, j) = normal(rng);
  }
  const Matrix g = a.triangularView<Eigen::Lower>().solve(l_scale.transpose());
  Matrix sigma = g.transpose() * g;
  return 0.5 * (sigma + sigma.transpose());
}

namespace {

/// Rows sharing one observed/missing pattern, with the index sets used by the
/// conditional draw.
struct MissingPattern {
  IndexSet missing;
  IndexSet observed;
  IndexSet rows;
};

std::vector<MissingPattern> missing_patterns(const Mask& mask) {
  std::map<std::vector<bool>, MissingPattern> by_key;
  for (Index i = 0; i < mask.rows(); ++i) {
    if (mask.row(i).all()) continue;
    std::vector<bool> key(static_cast<std::size_t>(mask.cols()));
    for (Index c = 0; c < mask.cols(); ++c) key[static_cast<std::size_t>(c)] = mask(i, c);
    auto& p = by_key[key];
    if (p.rows.empty()) {
      for (Index c = 0; c < mask.cols(); ++c) (mask(i, c) ? p.observed : p.missing).push_back(c);
    }
    p.rows.push_back(i);
  }
  std::vector<MissingPattern> out;
  for (auto& [k, p] : by_key) out.push_back(std::move(p));
  // Deterministic order: by first row.
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.rows.front() < b.rows.front(); });
  return out;
}

void impute_patterns(Matrix& y, const std::vector<MissingPattern>& patterns, const Matrix& x, const Matrix& b,
                     const Matrix& sigma, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& p : patterns) {
    const ConditionalGain g = conditional_gain(sigma, p.missing, p.observed);
    const Matrix l = cholesky_lower(g.cov, "conditional covariance of missing responses is not positive definite");
    const auto m = static_cast<Index>(p.missing.size());
    Vector z(m), dev(static_cast<Index>(p.observed.size()));
    for (Index row : p.rows) {
      const Vector mu = b * x.row(row).transpose();
      for (std::size_t k = 0; k < p.observed.size(); ++k) dev(static_cast<Index>(k)) = y(row, p.observed[k]) - mu(p.observed[k]);
      for (Index k = 0; k < m; ++k) z(k) = normal(rng);
      Vector draw = l * z;
      if (!p.observed.empty()) draw += g.gain * dev;
      for (Index k = 0; k < m; ++k) y(row, p.missing[static_cast<std::size_t>(k)]) = mu(p.missing[static_cast<std::size_t>(k)]) + draw(k);
    }
  }
}

}  // namespace

void impute_missing(Matrix& y, const Mask& mask, const Matrix& x, const Matrix& b, const Matrix& sigma, Rng& rng) {
  if (y.rows() != mask.rows() || y.cols() != mask.cols() || x.rows() != y.rows()) {
    throw std::invalid_argument("impute_missing: dimension mismatch");
  }
  impute_patterns(y, missing_patterns(mask), x, b, sigma, rng);
}

// -- sampler -------------------------------------------------------------------

namespace {

struct ChainOutput {
  std::vector<Matrix> b;
  std::vector<Matrix> sigma;
  std::vector<ZDraw> z;
};

struct FitData {
  Matrix x;        // fitted rows
  Matrix y;        // fitted rows, NaN where missing
  Mask mask;
  Matrix xtx;
  std::vector<MissingPattern> patterns;
  std::vector<std::pair<Index, Index>> missing_local;  // (fitted row, response)
};

ChainOutput run_chain(const FitData& fd, const ModelSpec& spec, int chain) {
  const Index lf = fd.x.rows();
  const Index q = fd.x.cols();
  const Index n = fd.y.cols();
  Rng rng = chain_rng(spec.seed, chain);
  const Matrix psi = spec.resolved_scale(n);
  const double post_df = spec.resolved_df(q) + static_cast<double>(lf);

  // Start: column-mean imputation, ridge coefficients, residual covariance
  // plus an identity floor.
  Matrix y = fd.y;
  for (Index c = 0; c < n; ++c) {
    double sum = 0.0;
    Index count = 0;
    for (Index i = 0; i < lf; ++i) {
      if (fd.mask(i, c)) {
        sum += y(i, c);
        ++count;
      }
    }
    const double mean = count ? sum / static_cast<double>(count) : 0.0;
    for (Index i = 0; i < lf; ++i) {
      if (!fd.mask(i, c)) y(i, c) = mean;
    }
  }
  Matrix ridge = fd.xtx;
  ridge.diagonal().array() += 1.0 / spec.coef_prior_variance;
  Matrix b = ridge.llt().solve(fd.x.transpose() * y).transpose();
  Matrix resid = y - fd.x * b.transpose();
  Matrix sigma = resid.transpose() * resid / static_cast<double>(lf) + Matrix::Identity(n, n);

  ChainOutput out;
  const int keep = spec.draws_per_chain();
  out.b.reserve(static_cast<std::size_t>(keep));
  out.sigma.reserve(static_cast<std::size_t>(keep));
  const bool impute = spec.impute && !fd.patterns.empty();
  int retained = 0;
  for (int t = 0; t < spec.iterations; ++t) {
    if (impute) impute_patterns(y, fd.patterns, fd.x, b, sigma, rng);
    const Matrix xty = fd.x.transpose() * y;
    b = draw_coefficients(fd.xtx, xty, sigma, spec.coef_prior_variance, rng);
    resid = y - fd.x * b.transpose();
    sigma = draw_inverse_wishart(psi + resid.transpose() * resid, post_df, rng);

    if (t < spec.burn_in || (t - spec.burn_in + 1) % spec.thin != 0) continue;
    out.b.push_back(b);
    out.sigma.push_back(sigma);
    if (spec.z_thin > 0 && retained % spec.z_thin == 0 && !fd.missing_local.empty()) {
      ZDraw zd{chain, retained, Vector(static_cast<Index>(fd.missing_local.size()))};
      for (std::size_t k = 0; k < fd.missing_local.size(); ++k) {
        zd.values(static_cast<Index>(k)) = y(fd.missing_local[k].first, fd.missing_local[k].second);
      }
      out.z.push_back(std::move(zd));
    }
    ++retained;
  }
  return out;
}

}  // namespace

PosteriorDraws gibbs_fit(const Dataset& d, const ModelSpec& spec, int threads) {
  const Index q = d.num_covariates();
  const Index n = d.num_responses();
  spec.validate(n, q);
  const IndexSet rows = observed_rows(d);
  if (rows.empty()) throw DataError("no rows with an observed response to fit");

  FitData fd;
  const auto lf = static_cast<Index>(rows.size());
  fd.x.resize(lf, q);
  fd.y.resize(lf, n);
  fd.mask.resize(lf, n);
  for (Index k = 0; k < lf; ++k) {
    fd.x.row(k) = d.X.row(rows[static_cast<std::size_t>(k)]);
    fd.y.row(k) = d.Y.row(rows[static_cast<std::size_t>(k)]);
    fd.mask.row(k) = d.mask.row(rows[static_cast<std::size_t>(k)]);
  }
  fd.xtx = fd.x.transpose() * fd.x;
  if (Eigen::LLT<Matrix>(fd.xtx).info() != Eigen::Success || !has_full_column_rank(fd.x)) {
    throw NumericalError("singular X'X over fitted rows");
  }
  fd.patterns = missing_patterns(fd.mask);
  if (!fd.patterns.empty() && !spec.impute) {
    throw std::invalid_argument("imputation disabled but fitted rows contain missing responses");
  }

  PosteriorDraws p;
  p.n = n;
  p.q = q;
  p.chains = spec.chains;
  p.draws_per_chain = spec.draws_per_chain();
  p.spec = spec;
  p.dataset_hash = dataset_hash(d);
  for (Index k = 0; k < lf; ++k) {
    for (Index c = 0; c < n; ++c) {
      if (!fd.mask(k, c)) {
        fd.missing_local.emplace_back(k, c);
        p.missing_cells.emplace_back(rows[static_cast<std::size_t>(k)], c);
      }
    }
  }

  std::vector<ChainOutput> outputs(static_cast<std::size_t>(spec.chains));
  const int workers = std::max(1, std::min(threads, spec.chains));
  if (workers == 1) {
    for (int c = 0; c < spec.chains; ++c) outputs[static_cast<std::size_t>(c)] = run_chain(fd, spec, c);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(spec.chains));
    for (int start = 0; start < spec.chains; start += workers) {
      std::vector<std::thread> pool;
      for (int c = start; c < std::min(spec.chains, start + workers); ++c) {
        pool.emplace_back([&, c] {
          try {
            outputs[static_cast<std::size_t>(c)] = run_chain(fd, spec, c);
          } catch (...) {
            errors[static_cast<std::size_t>(c)] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (int c = 0; c < spec.chains; ++c) {
    auto& o = outputs[static_cast<std::size_t>(c)];
    for (std::size_t a = 0; a < o.b.size(); ++a) {
      p.B.push_back(std::move(o.b[a]));
      p.Sigma.push_back(std::move(o.sigma[a]));
      p.chain.push_back(c);
      p.draw.push_back(static_cast<int>(a));
    }
    for (auto& z : o.z) p.Z.push_back(std::move(z));
  }
  return p;
}

Matrix predictive_mean_draws(const PosteriorDraws& p, const Vector& x) {
  if (x.size() != p.q) {
    throw std::invalid_argument("covariate row has " + std::to_string(x.size()) + " entries, expected " +
                                std::to_string(p.q));
  }
  Matrix mu(static_cast<Index>(p.size()), p.n);
  for (std::size_t a = 0; a < p.size(); ++a) mu.row(static_cast<Index>(a)) = (p.B[a] * x).transpose();
  return mu;
}

Vector posterior_predictive_draw(const PosteriorDraws& p, const Vector& x, std::size_t a, Rng& rng) {
  if (a >= p.size()) throw std::out_of_range("posterior draw index out of range");
  if (x.size() != p.q) throw std::invalid_argument("covariate row has the wrong length");
  Eigen::LLT<Matrix> llt(p.Sigma[a]);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("stored Sigma draw " + std::to_string(a) + " is not positive definite (corrupt draws)");
  }
  const Matrix l = llt.matrixL();
  return p.B[a] * x + l * standard_normal(p.n, rng);
}

}  // namespace extrapolmv
