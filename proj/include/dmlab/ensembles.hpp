#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dmlab/parallel.hpp"
#include "dmlab/types.hpp"

namespace dmlab {

enum class EnsembleKind {
  GaussianIID,
  SphericalRows,       // uniform on the sphere of radius sqrt(dim)
  UniformPM1,          // iid uniform on [-1, 1]; variance 1/3, not isotropic
  UniformIsotropic,    // iid sqrt(3) * uniform[-1, 1]
  RademacherIID,
  LogConcaveSimplex,   // uniform on r * B_1^dim, r = sqrt((dim+1)(dim+2)/2)
  HeavyTailedBounded,  // iid unit-variance Student-t(12), rejected while ||X||_2 > 100 sqrt(dim)
};

/// Which axis of the sampled matrix holds the independent random vectors.
enum class VectorLayout { rows, columns };

std::string to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& name);
bool is_isotropic(EnsembleKind kind);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::GaussianIID;
  Index rows = 1;
  Index cols = 1;
  std::optional<double> rowScale;
  VectorLayout layout = VectorLayout::columns;

  Index vector_dim() const { return layout == VectorLayout::rows ? cols : rows; }
  Index vector_count() const { return layout == VectorLayout::rows ? rows : cols; }
};

/// Gamma = Gamma_1^T Gamma_2^T : R^d -> R^n, where Gamma_1 (m x n) has rows
/// Z_i / sqrt(m) and Gamma_2 (d x m) has columns X_i.
struct ProductEnsembleSpec {
  EnsembleSpec rowSpec;  // Z over R^n: rowSpec.cols = n
  EnsembleSpec colSpec;  // X over R^d: colSpec.rows = d
  Index m = 1;

  Index n() const { return rowSpec.cols; }
  Index d() const { return colSpec.rows; }
};

struct ProductSample {
  Matrix gamma;   // n x d
  Matrix gamma1;  // m x n
  Matrix gamma2;  // d x m
};

/// Draws a rows x cols matrix. Vector i (row or column, per layout) is drawn
/// from stream(seed, i), so the result is a pure function of (spec, seed).
Matrix sample_matrix(const EnsembleSpec& spec, std::uint64_t seed, Exec exec = Exec::serial);

ProductSample sample_product(const ProductEnsembleSpec& spec, std::uint64_t seed, Exec exec = Exec::serial);
/// The Gamma of sample_product(spec, seed), bit for bit, without keeping the
/// m x n factor in memory.
Matrix sample_product_operator(const ProductEnsembleSpec& spec, std::uint64_t seed, Exec exec = Exec::serial);

/// Gamma_1^T Gamma_2^T for already materialized factors.
Matrix product_operator(const Matrix& gamma1, const Matrix& gamma2);

struct DiagnosticsOptions {
  double q = 8.0;
  std::vector<double> kappaGrid{0.001, 0.01, 0.05, 0.1, 0.2};
  double paourisC1 = 2.0;
  std::vector<double> uGrid{1.0, 2.0};
};

struct MarginalDiagnostics {
  Index dim = 0;
  std::size_t trials = 0;
  std::size_t probes = 0;
  double isotropyError = 0.0;
  double maxMarginalMean = 0.0;   // max over probes of |empirical mean| / stderr
  std::vector<int> probedP;
  double psi2Estimate = 0.0;
  double q = 0.0;
  double lqL2Ratio = 0.0;
  std::map<double, double> smallBallTable;
  std::map<double, double> normTail;  // u -> P(||Y||_2 >= C1 u sqrt(dim))
  double paourisC1 = 0.0;
};

/// Probes the one-dimensional marginals <Y, t> of the vectors of `spec` over
/// e_1, (1,...,1)/sqrt(dim) and `probeDirections` random unit directions.
/// Moments of order p are only reported when trials >= 200 p.
MarginalDiagnostics marginal_diagnostics(const EnsembleSpec& spec, std::size_t probeDirections, std::size_t trials,
                                         std::uint64_t seed, const DiagnosticsOptions& options = {},
                                         Exec exec = Exec::parallel);

}  // namespace dmlab
