#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dmlab/parallel.hpp"
#include "dmlab/types.hpp"

namespace dmlab {

struct SingularExtremes {
  double lambdaMin = 0.0;
  double lambdaMax = 0.0;
  int powerIterations = 0;
  bool minFromFullDecomposition = false;
};

inline constexpr double kPowerTolerance = 1e-8;
inline constexpr int kPowerIterationCap = 10000;
inline constexpr Index kFullDecompositionDim = 64;

/// Extreme singular values of M. The largest comes from power iteration on the
/// smaller Gram matrix (two seeded starts, the larger Rayleigh quotient wins);
/// the smallest from a full SVD when min(rows, cols) <= 64 and from shifted
/// power iteration otherwise. Throws ConvergenceError past the iteration cap.
SingularExtremes singular_extremes(const Matrix& m);

/// All singular values via Jacobi SVD, nonincreasing.
Vector singular_values(const Matrix& m);

struct SparseMethod {
  enum class Kind { exact, greedy };
  Kind kind = Kind::greedy;
  int restarts = 20;

  static SparseMethod exact() { return {Kind::exact, 0}; }
  static SparseMethod greedy(int restarts) { return {Kind::greedy, restarts}; }
};

std::string to_string(SparseMethod::Kind kind);

inline constexpr double kMaxExactSupports = 1e6;

struct SparseSupremum {
  double value = 0.0;
  Vector witness;               // unit vector in R^m supported on `support`
  std::vector<Index> support;   // sorted column indices
  SparseMethod::Kind method = SparseMethod::Kind::exact;
};

/// Number of k-subsets of an m-set, as a double.
double binomial(Index m, Index k);

/// sup over a with ||a||_2 <= 1, ||a||_0 <= k of ||sum_i a_i X_i||_2, X_i the
/// columns. `exact` enumerates all supports (<= 1e6 of them); `greedy` runs
/// restarts of steepest single-swap ascent from random k-subsets and is a
/// lower estimate. A warm-start support (size <= k) adds one extra restart
/// that begins from it, extended greedily to size k.
SparseSupremum sparse_supremum(const Matrix& columns, Index k, const SparseMethod& method, std::uint64_t seed,
                               const std::vector<Index>* warmStart = nullptr, Exec exec = Exec::parallel);

/// Largest singular value of the column submatrix on `support`.
double support_top_singular_value(const Matrix& columns, const std::vector<Index>& support);

struct SparseEntry {
  double value = 0.0;
  SparseMethod::Kind method = SparseMethod::Kind::exact;
};

struct EventReport {
  double kappa1 = 0.0, delta = 0.0, theta = 0.0;
  Index m = 0, d = 0;
  Index kEvent = 0;  // max(1, floor(theta m))
  double kappa1Measured = 0.0;
  double lambdaMin = 0.0, lambdaMax = 0.0;  // of Gamma_2 / sqrt(m)
  std::map<Index, SparseEntry> sparseSup;
  bool eventAHolds = false;
};

/// Checks the event: lambda_max(Gamma_2) <= kappa1 sqrt(m) and the sparse
/// supremum at k = max(1, floor(theta m)) <= delta sqrt(m). sparseSup holds
/// k in {1, 2, 4, ...} up to kEvent, kEvent itself, and m.
EventReport check_event_A(const Matrix& gamma2, double kappa1, double delta, double theta, const SparseMethod& method,
                          std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace dmlab
