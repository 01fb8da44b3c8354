#include "dmlab/events.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "dmlab/rng.hpp"

namespace dmlab {

namespace {

constexpr std::uint64_t kPowerSeed = 0x5eed5eedULL;

struct PowerResult {
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Top eigenvalue of a symmetric positive semidefinite matrix.
PowerResult power_iteration(const Matrix& g, Vector x, double scale) {
  PowerResult r;
  x.normalize();
  for (r.iterations = 1; r.iterations <= kPowerIterationCap; ++r.iterations) {
    const Vector y = g * x;
    const double ynorm = y.norm();
    if (ynorm == 0.0) {
      r.value = 0.0;
      r.residual = 0.0;
      r.converged = true;
      return r;
    }
    r.value = x.dot(y);
    r.residual = (y - r.value * x).norm();
    if (r.residual <= kPowerTolerance * std::max(std::abs(r.value), scale)) {
      r.converged = true;
      return r;
    }
    x = y / ynorm;
  }
  r.iterations = kPowerIterationCap;
  return r;
}

PowerResult top_eigenvalue(const Matrix& g, double scale) {
  PowerResult best;
  for (std::uint64_t start = 0; start < 2; ++start) {
    Rng rng = stream(kPowerSeed, start);
    PowerResult r = power_iteration(g, gaussian_vector(rng, g.rows()), scale);
    if (!r.converged) throw ConvergenceError("singular_extremes: power iteration hit the iteration cap", r.residual);
    if (start == 0 || r.value > best.value) {
      r.iterations += best.iterations;
      best = r;
    } else {
      best.iterations += r.iterations;
    }
  }
  return best;
}

Matrix small_gram(const Matrix& m) {
  return m.rows() <= m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
}

Matrix submatrix(const Matrix& columns, const std::vector<Index>& support) {
  Matrix sub(columns.rows(), static_cast<Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) sub.col(static_cast<Index>(j)) = columns.col(support[j]);
  return sub;
}

// Saturating Pascal table: table[i][j] = C(i, j) capped at 2^62.
class Binomials {
 public:
  Binomials(Index m, Index k) : k_(k), table_(static_cast<std::size_t>((m + 1) * (k + 1)), 0) {
    constexpr std::uint64_t cap = 1ULL << 62;
    for (Index i = 0; i <= m; ++i) {
      at(i, 0) = 1;
      for (Index j = 1; j <= std::min(i, k); ++j) at(i, j) = std::min(cap, at(i - 1, j - 1) + (j <= i - 1 ? at(i - 1, j) : 0));
    }
  }
  std::uint64_t operator()(Index i, Index j) const {
    if (j < 0 || j > i || j > k_) return 0;
    return table_[static_cast<std::size_t>(i * (k_ + 1) + j)];
  }

 private:
  std::uint64_t& at(Index i, Index j) { return table_[static_cast<std::size_t>(i * (k_ + 1) + j)]; }
  Index k_;
  std::vector<std::uint64_t> table_;
};

// Lexicographic rank -> k-subset of {0..m-1}.
std::vector<Index> unrank(std::uint64_t rank, Index m, Index k, const Binomials& binom) {
  std::vector<Index> out(static_cast<std::size_t>(k));
  Index x = 0;
  for (Index i = 0; i < k; ++i) {
    while (binom(m - 1 - x, k - 1 - i) <= rank) {
      rank -= binom(m - 1 - x, k - 1 - i);
      ++x;
    }
    out[static_cast<std::size_t>(i)] = x++;
  }
  return out;
}

bool next_combination(std::vector<Index>& c, Index m) {
  const Index k = static_cast<Index>(c.size());
  Index i = k - 1;
  while (i >= 0 && c[static_cast<std::size_t>(i)] == m - k + i) --i;
  if (i < 0) return false;
  ++c[static_cast<std::size_t>(i)];
  for (Index j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  return true;
}

struct Candidate {
  double value = -1.0;
  std::vector<Index> support;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.support < b.support;
}

Candidate steepest_ascent(const Matrix& columns, std::vector<Index> support) {
  const Index m = columns.cols();
  std::sort(support.begin(), support.end());
  Candidate cur{support_top_singular_value(columns, support), support};
  for (;;) {
    std::vector<bool> inside(static_cast<std::size_t>(m), false);
    for (Index s : cur.support) inside[static_cast<std::size_t>(s)] = true;
    Candidate best = cur;
    for (std::size_t pos = 0; pos < cur.support.size(); ++pos) {
      for (Index c = 0; c < m; ++c) {
        if (inside[static_cast<std::size_t>(c)]) continue;
        std::vector<Index> trial = cur.support;
        trial[pos] = c;
        const double v = support_top_singular_value(columns, trial);
        if (v > best.value * (1.0 + 1e-14) + 1e-300) {
          std::sort(trial.begin(), trial.end());
          best = {v, std::move(trial)};
        }
      }
    }
    if (best.value <= cur.value) return cur;
    cur = std::move(best);
  }
}

std::vector<Index> extend_greedily(const Matrix& columns, std::vector<Index> support, Index k) {
  const Index m = columns.cols();
  while (static_cast<Index>(support.size()) < k) {
    Index pick = -1;
    double best = -1.0;
    for (Index c = 0; c < m; ++c) {
      if (std::find(support.begin(), support.end(), c) != support.end()) continue;
      std::vector<Index> trial = support;
      trial.push_back(c);
      const double v = support_top_singular_value(columns, trial);
      if (v > best) {
        best = v;
        pick = c;
      }
    }
    support.push_back(pick);
  }
  std::sort(support.begin(), support.end());
  return support;
}

std::vector<Index> random_subset(Rng& rng, Index m, Index k) {
  std::vector<Index> pool(static_cast<std::size_t>(m));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, m - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

SparseSupremum finish(const Matrix& columns, Candidate best, SparseMethod::Kind method) {
  SparseSupremum out;
  out.value = best.value;
  out.support = std::move(best.support);
  out.method = method;
  out.witness = Vector::Zero(columns.cols());
  const Matrix sub = submatrix(columns, out.support);
  if (out.value > 0.0) {
    Eigen::JacobiSVD<Matrix> svd(sub, Eigen::ComputeThinV);
    const Vector v = svd.matrixV().col(0);
    for (std::size_t j = 0; j < out.support.size(); ++j) out.witness[out.support[j]] = v[static_cast<Index>(j)];
  } else {
    out.witness[out.support.front()] = 1.0;
  }
  return out;
}

}  // namespace

Vector singular_values(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

SingularExtremes singular_extremes(const Matrix& m) {
  require(m.rows() >= 1 && m.cols() >= 1, "singular_extremes: empty matrix");
  require(m.allFinite(), "singular_extremes: non-finite entries");
  SingularExtremes out;
  const Matrix g = small_gram(m);
  const double scale = g.cwiseAbs().maxCoeff() * std::numeric_limits<double>::epsilon();
  const PowerResult top = top_eigenvalue(g, scale);
  out.lambdaMax = std::sqrt(std::max(0.0, top.value));
  out.powerIterations = top.iterations;
  if (std::min(m.rows(), m.cols()) <= kFullDecompositionDim) {
    out.lambdaMin = singular_values(m).minCoeff();
    out.minFromFullDecomposition = true;
  } else {
    const Matrix shifted = top.value * Matrix::Identity(g.rows(), g.cols()) - g;
    const PowerResult low = top_eigenvalue(shifted, std::max(scale, kPowerTolerance * top.value));
    out.lambdaMin = std::sqrt(std::max(0.0, top.value - low.value));
    out.powerIterations += low.iterations;
  }
  out.lambdaMin = std::min(out.lambdaMin, out.lambdaMax);
  return out;
}

std::string to_string(SparseMethod::Kind kind) { return kind == SparseMethod::Kind::exact ? "exact" : "greedy"; }

double binomial(Index m, Index k) {
  if (k < 0 || k > m) return 0.0;
  return std::exp(std::lgamma(static_cast<double>(m) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                  std::lgamma(static_cast<double>(m - k) + 1.0));
}

double support_top_singular_value(const Matrix& columns, const std::vector<Index>& support) {
  if (support.size() == 1) return columns.col(support.front()).norm();
  const Matrix sub = submatrix(columns, support);
  const Matrix g = small_gram(sub);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

SparseSupremum sparse_supremum(const Matrix& columns, Index k, const SparseMethod& method, std::uint64_t seed,
                               const std::vector<Index>* warmStart, Exec exec) {
  const Index m = columns.cols();
  require(m >= 1 && columns.rows() >= 1, "sparse_supremum: empty matrix");
  require(k >= 1 && k <= m, "sparse_supremum: need 1 <= k <= m");

  if (k == m) {
    std::vector<Index> all(static_cast<std::size_t>(m));
    std::iota(all.begin(), all.end(), Index{0});
    const double v = support_top_singular_value(columns, all);
    return finish(columns, {v, std::move(all)}, SparseMethod::Kind::exact);
  }

  if (method.kind == SparseMethod::Kind::exact) {
    if (binomial(m, k) > kMaxExactSupports * (1.0 + 1e-9))
      throw InvalidArgument("sparse_supremum: C(m,k) exceeds the exact-enumeration budget; use greedy");
    const Binomials binom(m, k);
    const std::uint64_t count = binom(m, k);
    std::vector<double> values;
    if (exec == Exec::serial) {
      values.reserve(count);
      std::vector<Index> c(static_cast<std::size_t>(k));
      std::iota(c.begin(), c.end(), Index{0});
      do {
        values.push_back(support_top_singular_value(columns, c));
      } while (next_combination(c, m));
    } else {
      values = map_indices<double>(exec, count, [&](std::size_t r) {
        return support_top_singular_value(columns, unrank(r, m, k, binom));
      });
    }
    const auto best = std::max_element(values.begin(), values.end());  // first = lexicographically smallest
    const auto rank = static_cast<std::uint64_t>(best - values.begin());
    return finish(columns, {*best, unrank(rank, m, k, binom)}, SparseMethod::Kind::exact);
  }

  require(method.restarts >= 1, "sparse_supremum: greedy needs at least one restart");
  const std::size_t runs = static_cast<std::size_t>(method.restarts) + (warmStart ? 1 : 0);
  const auto results = map_indices<Candidate>(exec, runs, [&](std::size_t r) {
    if (r == static_cast<std::size_t>(method.restarts)) {
      require(static_cast<Index>(warmStart->size()) <= k, "sparse_supremum: warm start larger than k");
      return steepest_ascent(columns, extend_greedily(columns, *warmStart, k));
    }
    Rng rng = stream(seed, r);
    return steepest_ascent(columns, random_subset(rng, m, k));
  });
  Candidate best = results.front();
  for (const auto& c : results)
    if (better(c, best)) best = c;
  return finish(columns, std::move(best), SparseMethod::Kind::greedy);
}

EventReport check_event_A(const Matrix& gamma2, double kappa1, double delta, double theta, const SparseMethod& method,
                          std::uint64_t seed, Exec exec) {
  require(theta > 0.0 && theta < 0.25, "check_event_A: theta must lie in (0, 1/4)");
  require(delta > 0.0 && delta < 0.25, "check_event_A: delta must lie in (0, 1/4)");
  require(kappa1 >= 1.0, "check_event_A: kappa1 must be >= 1");
  EventReport rep;
  rep.kappa1 = kappa1;
  rep.delta = delta;
  rep.theta = theta;
  rep.m = gamma2.cols();
  rep.d = gamma2.rows();
  const double sqrt_m = std::sqrt(static_cast<double>(rep.m));
  rep.kEvent = std::max<Index>(1, static_cast<Index>(std::floor(theta * static_cast<double>(rep.m))));

  const SingularExtremes ext = singular_extremes(gamma2);
  rep.lambdaMax = ext.lambdaMax / sqrt_m;
  rep.lambdaMin = ext.lambdaMin / sqrt_m;
  rep.kappa1Measured = rep.lambdaMax;

  std::vector<Index> grid;
  for (Index k = 1; k < rep.kEvent; k *= 2) grid.push_back(k);
  grid.push_back(rep.kEvent);
  std::vector<Index> warm;
  for (Index k : grid) {
    if (k >= rep.m) break;
    const SparseSupremum s =
        sparse_supremum(gamma2, k, method, mix_seed(seed, static_cast<std::uint64_t>(k)), warm.empty() ? nullptr : &warm, exec);
    rep.sparseSup[k] = {s.value, s.method};
    warm = s.support;
  }
  rep.sparseSup[rep.m] = {ext.lambdaMax, SparseMethod::Kind::exact};

  double prev = 0.0;
  for (const auto& [k, entry] : rep.sparseSup) {
    if (entry.value < prev * (1.0 - 1e-9))
      throw std::logic_error("check_event_A: sparse supremum decreased in k at k=" + std::to_string(k));
    prev = std::max(prev, entry.value);
  }
  const auto it = rep.sparseSup.find(rep.kEvent);
  rep.eventAHolds = rep.kappa1Measured <= kappa1 && it->second.value <= delta * sqrt_m;
  return rep;
}

}  // namespace dmlab
