#pragma once

#include "extrapolmv/common.hpp"
#include "extrapolmv/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace testutil {

using extrapolmv::Index;
using extrapolmv::Matrix;
using extrapolmv::Vector;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Matrix gaussian(std::mt19937_64& g, Index rows, Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n(g);
  return m;
}

/// Intercept column followed by q - 1 standard normal covariates.
inline Matrix design(std::mt19937_64& g, Index l, Index q) {
  Matrix x(l, q);
  x.col(0).setOnes();
  if (q > 1) x.rightCols(q - 1) = gaussian(g, l, q - 1);
  return x;
}

inline Matrix random_spd(std::mt19937_64& g, Index n, double ridge = 0.5) {
  const Matrix a = gaussian(g, n, n);
  return a * a.transpose() / static_cast<double>(n) + ridge * Matrix::Identity(n, n);
}

inline Vector ols(const Matrix& x, const Vector& y) { return (x.transpose() * x).ldlt().solve(x.transpose() * y); }

/// Dense hat matrix, for small-l oracles only.
inline Matrix dense_hat(const Matrix& x) { return x * (x.transpose() * x).inverse() * x.transpose(); }

/// Fully observed dataset around a given design and response matrix.
inline extrapolmv::Dataset make_dataset(const Matrix& x, const Matrix& y) {
  extrapolmv::Dataset d;
  d.X = x;
  d.Y = y;
  d.mask = extrapolmv::Mask::Constant(y.rows(), y.cols(), true);
  for (Index i = 0; i < x.rows(); ++i) d.ids.push_back("r" + std::to_string(i));
  d.covariate_names.push_back("(Intercept)");
  for (Index c = 1; c < x.cols(); ++c) d.covariate_names.push_back("x" + std::to_string(c));
  for (Index r = 0; r < y.cols(); ++r) d.response_names.push_back("y" + std::to_string(r + 1));
  return d;
}

inline double rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size();) {
      std::size_t e = k;
      while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[k]]) ++e;
      for (std::size_t m = k; m <= e; ++m) r[idx[m]] = 0.5 * static_cast<double>(k + e);
      k = e + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("extrapolmv-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
