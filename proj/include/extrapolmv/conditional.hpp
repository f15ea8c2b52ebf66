#pragma once

#include "extrapolmv/common.hpp"

namespace extrapolmv {

struct ConditionalMoments {
  Vector mean;
  Matrix cov;
};

/// Moments of the target block of y ~ N(mu, Sigma) given y[given] = values:
///   mean = mu_t + S_tg S_gg^{-1} (values - mu_g)
///   cov  = S_tt - S_tg S_gg^{-1} S_gt
/// An empty `given` returns the marginal block. Throws NumericalError when
/// S_gg cannot be factorized, std::invalid_argument on overlapping or
/// out-of-range index sets.
ConditionalMoments conditional_mvn(const Vector& mu, const Matrix& sigma, const IndexSet& target,
                                   const IndexSet& given, const Vector& values);

/// The regression part of the conditional, independent of the mean vector:
/// gain = S_tg S_gg^{-1} and cov as above. conditional mean is
/// mu_t + gain (values - mu_g).
struct ConditionalGain {
  Matrix gain;
  Matrix cov;
};

ConditionalGain conditional_gain(const Matrix& sigma, const IndexSet& target, const IndexSet& given);

}  // namespace extrapolmv
