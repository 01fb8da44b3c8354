#include "dmlab/processes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "dmlab/rng.hpp"

namespace dmlab {

namespace {

Vector draw_weights(ProcessKind kind, Rng& rng, Index dim) {
  if (kind == ProcessKind::gaussian) return gaussian_vector(rng, dim);
  std::bernoulli_distribution coin(0.5);
  Vector eps(dim);
  for (Index i = 0; i < dim; ++i) eps[i] = coin(rng) ? 1.0 : -1.0;
  return eps;
}

Vector pattern_signs(std::uint64_t pattern, Index dim) {
  Vector eps(dim);
  for (Index i = 0; i < dim; ++i) eps[i] = ((pattern >> i) & 1ULL) ? 1.0 : -1.0;
  return eps;
}

// E sup over all 2^l sign patterns. Pattern p and its complement are summed
// together, which makes centred linear forms cancel exactly.
double exact_bernoulli_sup(const FiniteIndexSet& set, Exec exec) {
  const Index dim = set.ambient();
  require(dim <= kMaxExactBernoulliDim, "emp_sup: exact enumeration requires l <= 20");
  const std::uint64_t half = 1ULL << (dim - 1);
  const std::uint64_t full_mask = (dim == 64) ? ~0ULL : ((1ULL << dim) - 1ULL);
  const auto pair_sums = map_indices<double>(exec, static_cast<std::size_t>(half), [&](std::size_t p) {
    const std::uint64_t pattern = static_cast<std::uint64_t>(p);
    const double a = (set.vectors * pattern_signs(pattern, dim)).maxCoeff();
    const double b = (set.vectors * pattern_signs(~pattern & full_mask, dim)).maxCoeff();
    return a + b;
  });
  double total = 0.0;
  for (double v : pair_sums) total += v;
  return total / static_cast<double>(2 * half);
}

bool all_identical(const Matrix& v) {
  for (Index i = 1; i < v.rows(); ++i)
    if (v.row(i) != v.row(0)) return false;
  return true;
}

Matrix pairwise_distances(const Matrix& v) {
  const Index n = v.rows();
  Matrix d(n, n);
  for (Index i = 0; i < n; ++i) d.col(i) = (v.rowwise() - v.row(i)).rowwise().norm();
  return d;
}

std::size_t packing_from_distances(const Matrix& dist, double epsilon) {
  std::vector<Index> accepted;
  for (Index i = 0; i < dist.rows(); ++i) {
    bool ok = true;
    for (Index j : accepted)
      if (dist(i, j) < epsilon) {
        ok = false;
        break;
      }
    if (ok) accepted.push_back(i);
  }
  return accepted.size();
}

}  // namespace

FiniteIndexSet::FiniteIndexSet(Matrix v) : vectors(std::move(v)) {
  require(vectors.rows() >= 1 && vectors.cols() >= 1, "FiniteIndexSet: empty set");
  require(vectors.allFinite(), "FiniteIndexSet: non-finite entries");
}

std::vector<double> sup_samples(ProcessKind kind, const FiniteIndexSet& set, std::size_t trials, std::uint64_t seed,
                                Exec exec) {
  return map_indices<double>(exec, trials, [&](std::size_t i) {
    Rng rng = stream(seed, i);
    return (set.vectors * draw_weights(kind, rng, set.ambient())).maxCoeff();
  });
}

ProcessEstimate emp_sup(ProcessKind kind, const FiniteIndexSet& set, const SupMethod& method, std::uint64_t seed,
                        Exec exec) {
  if (method.kind == SupMethod::Kind::exactEnumeration) {
    require(kind == ProcessKind::bernoulli, "emp_sup: exact enumeration is only defined for the Bernoulli process");
    return {exact_bernoulli_sup(set, exec), 0.0, method};
  }
  require(method.trials >= 2, "emp_sup: monteCarlo needs at least 2 trials");
  const auto s = sup_samples(kind, set, method.trials, seed, exec);
  const double n = static_cast<double>(s.size());
  double sum = 0.0;
  for (double v : s) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : s) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n), method};
}

double bernoulli_lp(const Vector& a, int p) {
  require(p >= 1, "bernoulli_lp: p must be >= 1");
  std::vector<double> sorted(static_cast<std::size_t>(a.size()));
  for (Index i = 0; i < a.size(); ++i) sorted[static_cast<std::size_t>(i)] = std::abs(a[i]);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t head = std::min<std::size_t>(static_cast<std::size_t>(p), sorted.size());
  double head_sum = 0.0, tail_sq = 0.0;
  for (std::size_t i = 0; i < head; ++i) head_sum += sorted[i];
  for (std::size_t i = head; i < sorted.size(); ++i) tail_sq += sorted[i] * sorted[i];
  return head_sum + std::sqrt(static_cast<double>(p)) * std::sqrt(tail_sq);
}

Gamma2Bound gamma2_upper(const FiniteIndexSet& set) {
  const Index n = set.size();
  const Matrix dist = pairwise_distances(set.vectors);

  Index centre = 0;
  dist.colwise().maxCoeff().minCoeff(&centre);

  AdmissibleSequence seq;
  seq.order.push_back(centre);
  Vector nearest = dist.col(centre);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  used[static_cast<std::size_t>(centre)] = true;
  while (static_cast<Index>(seq.order.size()) < n) {
    Index arg = -1;
    double far = -1.0;
    for (Index i = 0; i < n; ++i)
      if (!used[static_cast<std::size_t>(i)] && nearest[i] > far) {
        far = nearest[i];
        arg = i;
      }
    used[static_cast<std::size_t>(arg)] = true;
    seq.order.push_back(arg);
    nearest = nearest.cwiseMin(dist.col(arg));
  }

  const double n4 = static_cast<double>(std::max<Index>(n, 4));
  const int s_max = static_cast<int>(std::ceil(std::log2(std::log2(n4)))) + 2;
  for (int s = 0; s <= s_max; ++s) {
    std::size_t cap = 1;
    if (s >= 1) {
      const int exponent = 1 << s;
      cap = exponent >= 63 ? static_cast<std::size_t>(n) : (std::size_t{1} << exponent);
    }
    seq.levelSizes.push_back(std::min<std::size_t>(cap, static_cast<std::size_t>(n)));
  }

  for (std::size_t s = 0; s < seq.levelSizes.size(); ++s) {
    std::vector<Index> assign(static_cast<std::size_t>(n));
    for (Index v = 0; v < n; ++v) {
      Index best = seq.order[0];
      double best_d = dist(v, best);
      for (std::size_t k = 1; k < seq.levelSizes[s]; ++k) {
        const Index cand = seq.order[k];
        if (dist(v, cand) < best_d) {
          best_d = dist(v, cand);
          best = cand;
        }
      }
      assign[static_cast<std::size_t>(v)] = best;
    }
    seq.assignment.push_back(std::move(assign));
  }

  double value = 0.0;
  for (Index v = 0; v < n; ++v) {
    double chain = set.vectors.row(seq.assignment[0][static_cast<std::size_t>(v)]).norm();
    for (std::size_t s = 0; s + 1 < seq.assignment.size(); ++s) {
      const Index from = seq.assignment[s][static_cast<std::size_t>(v)];
      const Index to = seq.assignment[s + 1][static_cast<std::size_t>(v)];
      chain += std::pow(2.0, 0.5 * static_cast<double>(s)) * dist(from, to);
    }
    value = std::max(value, chain);
  }
  return {value, std::move(seq)};
}

std::size_t packing_number(const FiniteIndexSet& set, double epsilon) {
  return packing_from_distances(pairwise_distances(set.vectors), epsilon);
}

double sudakov_lower(const FiniteIndexSet& set, double cSud) {
  if (set.size() < 2) return 0.0;
  const Matrix dist = pairwise_distances(set.vectors);
  std::vector<double> pairs;
  for (Index i = 0; i < dist.rows(); ++i)
    for (Index j = i + 1; j < dist.cols(); ++j)
      if (dist(i, j) > 0.0) pairs.push_back(dist(i, j));
  if (pairs.empty()) return 0.0;
  std::sort(pairs.begin(), pairs.end());
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) {
    const double pos = 0.05 * k * static_cast<double>(pairs.size() - 1);
    grid.push_back(pairs[static_cast<std::size_t>(std::llround(pos))]);
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double best = 0.0;
  for (double eps : grid) {
    const auto packing = packing_from_distances(dist, eps);
    best = std::max(best, cSud * eps * std::sqrt(std::log(static_cast<double>(packing))));
  }
  return best;
}

ConcentrationTable concentration_check(const FiniteIndexSet& set, std::size_t trials, std::uint64_t seed, double c,
                                       Exec exec) {
  require(trials >= 2, "concentration_check: need at least 2 trials");
  ConcentrationTable table;
  table.sigmaStar = set.vectors.rowwise().norm().maxCoeff();
  const auto samples = sup_samples(ProcessKind::bernoulli, set, trials, seed, exec);
  if (set.ambient() <= 16) {
    table.centre = exact_bernoulli_sup(set, exec);
    table.exactCentre = true;
  } else {
    double sum = 0.0;
    for (double v : samples) sum += v;
    table.centre = sum / static_cast<double>(samples.size());
  }
  for (int k = 0; k <= 16; ++k) {
    TailRow row;
    row.x = 0.25 * k * table.sigmaStar;
    std::size_t exceed = 0;
    for (double v : samples)
      if (std::abs(v - table.centre) > row.x) ++exceed;
    row.empirical = static_cast<double>(exceed) / static_cast<double>(samples.size());
    row.bound = table.sigmaStar > 0.0 ? 2.0 * std::exp(-c * (row.x * row.x) / (table.sigmaStar * table.sigmaStar))
                                      : 2.0;
    table.rows.push_back(row);
  }
  return table;
}

double bernoulli_gaussian_ratio(const FiniteIndexSet& set, std::size_t trials, std::uint64_t seed, Exec exec) {
  // A single point (up to repetition) is a centred linear form: both means vanish.
  if (all_identical(set.vectors)) return 1.0;
  const double b = emp_sup(ProcessKind::bernoulli, set, SupMethod::monte_carlo(trials), seed, exec).value;
  const double g = emp_sup(ProcessKind::gaussian, set, SupMethod::monte_carlo(trials), seed, exec).value;
  if (g == 0.0) return b == 0.0 ? 1.0 : std::copysign(std::numeric_limits<double>::infinity(), b);
  return b / g;
}

}  // namespace dmlab
