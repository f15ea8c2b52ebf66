#include "extrapolmv/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace extrapolmv {

namespace {

std::vector<std::vector<double>> split_halves(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) throw std::invalid_argument("no chains supplied");
  const std::size_t len = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != len) throw std::invalid_argument("chains must have equal length");
  }
  if (len < 4) throw std::invalid_argument("too few draws: need at least 4 per chain");
  const std::size_t half = len / 2;
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

struct Moments {
  double w = 0.0;         // mean within-sequence variance
  double b_over_n = 0.0;  // variance of sequence means
  double var_plus = 0.0;
  std::vector<double> means;
};

Moments moments(const std::vector<std::vector<double>>& seqs) {
  Moments m;
  const auto count = static_cast<double>(seqs.size());
  const auto n = static_cast<double>(seqs.front().size());
  double grand = 0.0;
  for (const auto& s : seqs) {
    const double mu = mean_of(s);
    m.means.push_back(mu);
    m.w += var_of(s, mu);
    grand += mu;
  }
  m.w /= count;
  grand /= count;
  for (double mu : m.means) m.b_over_n += (mu - grand) * (mu - grand);
  m.b_over_n /= (count - 1.0);
  m.var_plus = (n - 1.0) / n * m.w + m.b_over_n;
  return m;
}

bool all_equal(const std::vector<std::vector<double>>& seqs) {
  const double first = seqs.front().front();
  for (const auto& s : seqs)
    for (double v : s)
      if (v != first) return false;
  return true;
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
  const auto seqs = split_halves(chains);
  if (all_equal(seqs)) return 1.0;
  const Moments m = moments(seqs);
  if (m.w <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(m.var_plus / m.w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  const auto seqs = split_halves(chains);
  const std::size_t len = seqs.front().size();
  const double total = static_cast<double>(len * seqs.size());
  if (all_equal(seqs)) return total;
  const Moments m = moments(seqs);
  if (m.w <= 0.0) return 1.0;

  // Biased autocovariance of each sequence at lag t, averaged across sequences.
  auto mean_acov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t j = 0; j < seqs.size(); ++j) {
      const auto& s = seqs[j];
      const double mu = m.means[j];
      double sum = 0.0;
      for (std::size_t i = 0; i + lag < len; ++i) sum += (s[i] - mu) * (s[i + lag] - mu);
      acc += sum / static_cast<double>(len);
    }
    return acc / static_cast<double>(seqs.size());
  };
  auto rho = [&](std::size_t lag) { return lag == 0 ? 1.0 : 1.0 - (m.w - mean_acov(lag)) / m.var_plus; };

  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < len; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  if (!(tau > 0.0)) return total;
  return std::min(total, total / tau);
}

ParameterSummary summarize_parameter(const std::string& name, const std::vector<std::vector<double>>& chains) {
  ParameterSummary s;
  s.name = name;
  s.rhat = split_rhat(chains);
  s.ess = effective_sample_size(chains);
  double sum = 0.0, count = 0.0;
  for (const auto& c : chains)
    for (double v : c) {
      sum += v;
      count += 1.0;
    }
  s.mean = sum / count;
  double ss = 0.0;
  for (const auto& c : chains)
    for (double v : c) ss += (v - s.mean) * (v - s.mean);
  s.sd = count > 1.0 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  return s;
}

double ConvergenceSummary::max_rhat() const {
  double m = 1.0;
  for (const auto& p : parameters) m = std::max(m, p.rhat);
  return m;
}

double ConvergenceSummary::min_ess() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : parameters) m = std::min(m, p.ess);
  return m;
}

ConvergenceSummary convergence_summary(const PosteriorDraws& p) {
  if (p.chains < 1 || p.draws_per_chain < 1 || p.size() != static_cast<std::size_t>(p.chains) * static_cast<std::size_t>(p.draws_per_chain)) {
    throw std::invalid_argument("posterior draws are inconsistent with their chain layout");
  }
  if (p.chains < 2 && p.draws_per_chain < 100) {
    throw std::invalid_argument("too few draws for convergence diagnostics: need 2 chains or 100 draws");
  }
  if (p.draws_per_chain < 4) throw std::invalid_argument("too few draws: need at least 4 per chain");

  const auto per = static_cast<std::size_t>(p.draws_per_chain);
  auto collect = [&](auto&& get) {
    std::vector<std::vector<double>> chains(static_cast<std::size_t>(p.chains), std::vector<double>(per));
    for (std::size_t a = 0; a < p.size(); ++a) chains[static_cast<std::size_t>(p.chain[a])][static_cast<std::size_t>(p.draw[a])] = get(a);
    return chains;
  };
  ConvergenceSummary out;
  for (Index r = 0; r < p.n; ++r)
    for (Index c = 0; c < p.q; ++c) {
      out.parameters.push_back(summarize_parameter(
          "B[" + std::to_string(r) + "," + std::to_string(c) + "]", collect([&](std::size_t a) { return p.B[a](r, c); })));
    }
  for (Index r = 0; r < p.n; ++r)
    for (Index c = r; c < p.n; ++c) {
      out.parameters.push_back(summarize_parameter("Sigma[" + std::to_string(r) + "," + std::to_string(c) + "]",
                                                   collect([&](std::size_t a) { return p.Sigma[a](r, c); })));
    }
  return out;
}

nlohmann::json to_json(const ConvergenceSummary& s) {
  nlohmann::json j;
  j["max_rhat"] = s.max_rhat();
  j["min_ess"] = s.min_ess();
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : s.parameters) {
    params.push_back({{"name", p.name}, {"rhat", p.rhat}, {"ess", p.ess}, {"mean", p.mean}, {"sd", p.sd}});
  }
  j["parameters"] = params;
  return j;
}

}  // namespace extrapolmv
