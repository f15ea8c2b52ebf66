#include "extrapolmv/conditional.hpp"

#include <vector>

namespace extrapolmv {

namespace {

void check_sets(Index n, const IndexSet& target, const IndexSet& given) {
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  auto mark = [&](const IndexSet& s) {
    for (Index i : s) {
      if (i < 0 || i >= n) throw std::invalid_argument("conditional_mvn: index out of range");
      if (used[static_cast<std::size_t>(i)]) {
        throw std::invalid_argument("conditional_mvn: target and given sets must be disjoint");
      }
      used[static_cast<std::size_t>(i)] = 1;
    }
  };
  mark(target);
  mark(given);
}

Matrix block(const Matrix& s, const IndexSet& rows, const IndexSet& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(static_cast<Index>(r), static_cast<Index>(c)) = s(rows[r], cols[c]);
  return out;
}

}  // namespace

ConditionalGain conditional_gain(const Matrix& sigma, const IndexSet& target, const IndexSet& given) {
  if (sigma.rows() != sigma.cols()) throw std::invalid_argument("conditional_mvn: Sigma must be square");
  check_sets(sigma.rows(), target, given);
  ConditionalGain g;
  g.cov = block(sigma, target, target);
  if (given.empty()) {
    g.gain = Matrix::Zero(static_cast<Index>(target.size()), 0);
    return g;
  }
  const Matrix s_gg = block(sigma, given, given);
  const Matrix s_gt = block(sigma, given, target);
  Eigen::LLT<Matrix> llt(s_gg);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("conditional_mvn: conditioning block of Sigma is singular");
  }
  // gain' = S_gg^{-1} S_gt
  g.gain = llt.solve(s_gt).transpose();
  g.cov -= g.gain * s_gt;
  g.cov = 0.5 * (g.cov + g.cov.transpose());
  return g;
}

ConditionalMoments conditional_mvn(const Vector& mu, const Matrix& sigma, const IndexSet& target,
                                   const IndexSet& given, const Vector& values) {
  if (mu.size() != sigma.rows()) throw std::invalid_argument("conditional_mvn: mu and Sigma sizes differ");
  if (values.size() != static_cast<Index>(given.size())) {
    throw std::invalid_argument("conditional_mvn: one value per conditioning index required");
  }
  const ConditionalGain g = conditional_gain(sigma, target, given);
  ConditionalMoments m;
  m.mean.resize(static_cast<Index>(target.size()));
  for (std::size_t t = 0; t < target.size(); ++t) m.mean(static_cast<Index>(t)) = mu(target[t]);
  if (!given.empty()) {
    Vector dev(static_cast<Index>(given.size()));
    for (std::size_t k = 0; k < given.size(); ++k) dev(static_cast<Index>(k)) = values(static_cast<Index>(k)) - mu(given[k]);
    m.mean += g.gain * dev;
  }
  m.cov = g.cov;
  return m;
}

}  // namespace extrapolmv
