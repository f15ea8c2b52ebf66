#pragma once

#include "extrapolmv/common.hpp"
#include "extrapolmv/dataset.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace extrapolmv {

using Rng = std::mt19937_64;

/// Prior and run configuration for the multivariate linear model
///   y_i = B x_i + e_i,  e_i ~ N(0, Sigma),
///   b_rc ~ N(0, coef_prior_variance) iid,  Sigma ~ IW(iw_scale, iw_df).
///
/// Inverse-Wishart convention: density proportional to
/// |Sigma|^{-(df + n + 1)/2} exp(-tr(scale Sigma^{-1})/2), so E[Sigma] =
/// scale/(df - n - 1) for df > n + 1.
struct ModelSpec {
  double coef_prior_variance = 100.0;
  Matrix iw_scale;             // empty means identity
  std::optional<double> iw_df; // unset means q + 1
  int iterations = 20000;
  int burn_in = 10000;
  int thin = 1;
  int chains = 2;
  std::uint64_t seed = 0;
  /// Keep imputed responses on every z_thin-th retained draw; 0 keeps none.
  int z_thin = 0;
  /// Disables the imputation step; only valid for data without missing cells
  /// among fitted rows.
  bool impute = true;

  Matrix resolved_scale(Index n) const;
  double resolved_df(Index q) const;
  /// Throws std::invalid_argument on inconsistent settings.
  void validate(Index n, Index q) const;
  /// Retained draws per chain: floor((iterations - burn_in) / thin).
  int draws_per_chain() const;
};

nlohmann::json to_json(const ModelSpec& s);
/// Missing keys keep their defaults.
ModelSpec model_spec_from_json(const nlohmann::json& j, ModelSpec base = {});

struct ZDraw {
  int chain = 0;
  int draw = 0;
  Vector values;  // aligned with PosteriorDraws::missing_cells
};

/// Retained posterior draws, chain-major: all draws of chain 0, then chain 1.
struct PosteriorDraws {
  Index n = 0;
  Index q = 0;
  int chains = 0;
  int draws_per_chain = 0;
  std::vector<Matrix> B;      // each n x q
  std::vector<Matrix> Sigma;  // each n x n
  std::vector<int> chain;     // chain id per draw
  std::vector<int> draw;      // retained index within its chain
  std::vector<std::pair<Index, Index>> missing_cells;  // (dataset row, response)
  std::vector<ZDraw> Z;
  ModelSpec spec;
  std::string dataset_hash;

  std::size_t size() const { return B.size(); }
};

/// Seeds chain `chain` from (seed, chain) through std::seed_seq, so each
/// chain's stream is fixed regardless of scheduling.
Rng chain_rng(std::uint64_t seed, int chain);

/// Gibbs sampler over (Z, B, Sigma). Fits rows with at least one observed
/// response. Chains run on up to `threads` threads; output does not depend
/// on the thread count.
PosteriorDraws gibbs_fit(const Dataset& d, const ModelSpec& spec, int threads = 1);

/// mu^(a) = B^(a) x for every retained draw, as an A x n matrix.
Matrix predictive_mean_draws(const PosteriorDraws& p, const Vector& x);

/// One draw from N(B^(a) x, Sigma^(a)).
Vector posterior_predictive_draw(const PosteriorDraws& p, const Vector& x, std::size_t a, Rng& rng);

// -- Gibbs kernels -------------------------------------------------------------

/// Draw of the n x q coefficient matrix from its Gaussian full conditional
/// given Sigma and completed responses, with xtx = X'X and xty = X'Y (q x n).
Matrix draw_coefficients(const Matrix& xtx, const Matrix& xty, const Matrix& sigma, double prior_variance,
                         Rng& rng);

/// Moments of the coefficient full conditional over vec(B') (q*n entries,
/// response-major blocks of q).
struct CoefficientConditional {
  Vector mean;
  Matrix precision;
};
CoefficientConditional coefficient_conditional(const Matrix& xtx, const Matrix& xty, const Matrix& sigma,
                                               double prior_variance);

/// Sigma ~ IW(scale, df) by Bartlett decomposition.
Matrix draw_inverse_wishart(const Matrix& scale, double df, Rng& rng);

/// Replaces unobserved entries of `y` (rows of `x`) with draws from the
/// conditional normal given the observed entries of the same row.
/// Observed entries are left untouched; rows with nothing observed are
/// drawn from the full N(B x_i, Sigma).
void impute_missing(Matrix& y, const Mask& mask, const Matrix& x, const Matrix& b, const Matrix& sigma, Rng& rng);

}  // namespace extrapolmv
