#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmlab/parallel.hpp"
#include "dmlab/types.hpp"

namespace dmlab {

/// Finite index set V in R^l, one vector per row.
struct FiniteIndexSet {
  Matrix vectors;

  explicit FiniteIndexSet(Matrix v);
  Index size() const { return vectors.rows(); }
  Index ambient() const { return vectors.cols(); }
};

enum class ProcessKind { gaussian, bernoulli };

struct SupMethod {
  enum class Kind { monteCarlo, exactEnumeration };
  Kind kind = Kind::monteCarlo;
  std::size_t trials = 10000;

  static SupMethod monte_carlo(std::size_t trials) { return {Kind::monteCarlo, trials}; }
  static SupMethod exact() { return {Kind::exactEnumeration, 0}; }
};

struct ProcessEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  SupMethod method;
};

inline constexpr Index kMaxExactBernoulliDim = 20;

/// Per-trial values of max_{v in T} sum_i xi_i v_i. Trial i draws its signs or
/// gaussians from stream(seed, i): two sets of equal ambient dimension
/// evaluated with one seed see common random numbers.
std::vector<double> sup_samples(ProcessKind kind, const FiniteIndexSet& set, std::size_t trials, std::uint64_t seed,
                                Exec exec = Exec::parallel);

ProcessEstimate emp_sup(ProcessKind kind, const FiniteIndexSet& set, const SupMethod& method, std::uint64_t seed,
                        Exec exec = Exec::parallel);

/// sum_{i<=p} a*_i + sqrt(p) (sum_{i>p} (a*_i)^2)^{1/2}, a* the nonincreasing
/// rearrangement of |a|.
double bernoulli_lp(const Vector& a, int p);

struct AdmissibleSequence {
  /// Farthest-first order of T (indices into the set); V_s is the prefix of
  /// length levelSizes[s].
  std::vector<Index> order;
  std::vector<std::size_t> levelSizes;
  /// assignment[s][v] = index (into the set) of pi_s v, the nearest point of V_s.
  std::vector<std::vector<Index>> assignment;
};

struct Gamma2Bound {
  double value = 0.0;
  AdmissibleSequence sequence;
};

/// Upper bound on gamma_2(T, l_2) from a greedy admissible sequence built from
/// T's own points: V_0 is the approximate 1-center, V_s the farthest-first
/// prefix of size min(2^(2^s), |T|).
Gamma2Bound gamma2_upper(const FiniteIndexSet& set);

/// max over epsilon on a grid of pairwise-distance quantiles of
/// cSud * epsilon * sqrt(log N(epsilon)), N the greedy epsilon-packing number.
double sudakov_lower(const FiniteIndexSet& set, double cSud);

/// Greedy epsilon-packing number (scan in index order).
std::size_t packing_number(const FiniteIndexSet& set, double epsilon);

struct TailRow {
  double x = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
};

struct ConcentrationTable {
  double sigmaStar = 0.0;    // sup_v ||v||_2
  double centre = 0.0;       // E sup used for centering
  bool exactCentre = false;  // centre computed by enumeration
  std::vector<TailRow> rows;
};

/// Empirical P(|sup_v sum eps_i v_i - E sup| > x) for x = k sigma*/4,
/// k = 0..16, next to 2 exp(-c x^2 / sigma*^2).
ConcentrationTable concentration_check(const FiniteIndexSet& set, std::size_t trials, std::uint64_t seed, double c,
                                       Exec exec = Exec::parallel);

/// E sup of the Bernoulli process over E sup of the gaussian one (0/0 -> 1).
double bernoulli_gaussian_ratio(const FiniteIndexSet& set, std::size_t trials, std::uint64_t seed,
                                Exec exec = Exec::parallel);

}  // namespace dmlab
