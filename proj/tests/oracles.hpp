#pragma once
// Independent reference computations for the test suites. Nothing here calls
// into the library's numerical kernels.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// E||g||_2 for g standard gaussian in R^n, from c_1 = sqrt(2/pi), c_{k+1} = k / c_k.
inline double gaussian_norm_mean(long n) {
  double c = std::sqrt(2.0 / M_PI);
  for (long k = 1; k < n; ++k) c = static_cast<double>(k) / c;
  return c;
}

inline double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

// E max_i |g_i| over n coordinates: integral of 1 - (2 Phi(t) - 1)^n by
// composite Simpson on [0, 12] with 2^16 panels.
inline double cube_width(long n) {
  const int panels = 1 << 16;
  const double b = 12.0, h = b / panels;
  auto f = [&](double t) { return 1.0 - std::pow(std::erf(t / std::sqrt(2.0)), static_cast<double>(n)); };
  double s = f(0.0) + f(b);
  for (int i = 1; i < panels; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// E sup_v <eps, v> by walking all 2^l sign patterns.
inline double bernoulli_sup_exact(const Matrix& rows) {
  const long l = rows.cols();
  double total = 0.0;
  Vector eps(l);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << l); ++mask) {
    for (long i = 0; i < l; ++i) eps[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    total += (rows * eps).maxCoeff();
  }
  return total / std::ldexp(1.0, static_cast<int>(l));
}

// ||sum eps_i a_i||_{L_p} by enumeration.
inline double bernoulli_lp_exact(const Vector& a, int p) {
  const long l = a.size();
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << l); ++mask) {
    double s = 0.0;
    for (long i = 0; i < l; ++i) s += (mask >> i) & 1 ? a[i] : -a[i];
    total += std::pow(std::abs(s), p);
  }
  return std::pow(total / std::ldexp(1.0, static_cast<int>(l)), 1.0 / p);
}

inline double top_singular(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// max over supports of size exactly min(k, m) via bitmasks.
inline double sparse_sup_bruteforce(const Matrix& cols, int k) {
  const int m = static_cast<int>(cols.cols());
  k = std::min(k, m);
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    if (__builtin_popcountll(mask) != k) continue;
    Matrix sub(cols.rows(), k);
    int c = 0;
    for (int i = 0; i < m; ++i)
      if ((mask >> i) & 1) sub.col(c++) = cols.col(i);
    best = std::max(best, top_singular(sub));
  }
  return best;
}

// Greedy rho-packing over a fixed candidate list, quadratic scan.
inline std::vector<Vector> greedy_packing(const std::vector<Vector>& candidates, double rho) {
  std::vector<Vector> out;
  for (const auto& c : candidates) {
    bool ok = true;
    for (const auto& a : out)
      if ((a - c).squaredNorm() < rho * rho) {
        ok = false;
        break;
      }
    if (ok) out.push_back(c);
  }
  return out;
}

// Bai-Yin edges (sqrt(rows) +- sqrt(cols)) for a tall gaussian matrix.
inline double bai_yin_ratio(double n, double d) { return (std::sqrt(n) + std::sqrt(d)) / (std::sqrt(n) - std::sqrt(d)); }

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace oracle
