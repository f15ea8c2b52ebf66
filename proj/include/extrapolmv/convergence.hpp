#pragma once

#include "extrapolmv/sampler.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace extrapolmv {

struct ParameterSummary {
  std::string name;
  double rhat = 1.0;
  double ess = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

struct ConvergenceSummary {
  std::vector<ParameterSummary> parameters;
  double max_rhat() const;
  double min_ess() const;
};

/// Split R-hat: each chain is cut into halves (the middle draw of an odd
/// length is dropped) and the potential scale reduction is computed over the
/// halves. Constant input gives 1; halves that are each constant but differ
/// give +infinity.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Multi-chain effective sample size over the split halves using Geyer's
/// initial monotone positive sequence; capped at the total draw count.
/// Constant input returns the draw count.
double effective_sample_size(const std::vector<std::vector<double>>& chains);

ParameterSummary summarize_parameter(const std::string& name, const std::vector<std::vector<double>>& chains);

/// Every B[r,c] and every Sigma[r,c] with r <= c. Requires at least four
/// draws per chain and either two chains or 100 draws.
ConvergenceSummary convergence_summary(const PosteriorDraws& p);

nlohmann::json to_json(const ConvergenceSummary& s);

}  // namespace extrapolmv
