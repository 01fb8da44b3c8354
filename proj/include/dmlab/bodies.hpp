#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "dmlab/parallel.hpp"
#include "dmlab/types.hpp"

namespace dmlab {

class ConvexBody;

/// Unit ball of the l_p norm in R^n, p in [1, inf].
struct LpBall {
  double p;
  Index n;
};

/// K given through its polar: ||x||_K = max_t <x, t> over the stored dual
/// vertices. The list is kept symmetric (t and -t both present).
struct PolarPolytope {
  Matrix dual_vertices;  // one vertex per row
};

/// The image D K of a base body under D = diag(scales), so that
/// ||x||_{DK} = ||D^{-1} x||_K.
struct DiagonalImage {
  std::shared_ptr<const ConvexBody> base;
  Vector scales;
};

class ConvexBody {
 public:
  using Kind = std::variant<LpBall, PolarPolytope, DiagonalImage>;

  static ConvexBody lp_ball(double p, Index n);
  static ConvexBody cube(Index n) { return lp_ball(std::numeric_limits<double>::infinity(), n); }
  /// Symmetrizes the vertex list (adds -t for every t lacking its negative).
  static ConvexBody polar_polytope(const Matrix& dual_vertices);
  static ConvexBody diagonal_image(ConvexBody base, Vector scales);

  Index dim() const noexcept { return n_; }
  const Kind& kind() const noexcept { return kind_; }
  std::string describe() const;

  /// True for LpBall with the given p (p = inf allowed).
  bool is_lp(double p) const noexcept;

 private:
  ConvexBody(Kind kind, Index n) : kind_(std::move(kind)), n_(n) {}
  Kind kind_;
  Index n_;
};

/// ||x||_K. Throws on dimension mismatch or non-finite input.
double norm_K(const ConvexBody& body, const Vector& x);

/// A point t of K° with <x, t> = ||x||_K, i.e. a subgradient of the norm at x.
Vector dual_maximizer(const ConvexBody& body, const Vector& x);

/// sup over K° of ||t||_2.
double dual_norm_sup(const ConvexBody& body);

struct WidthMethod {
  enum class Kind { monteCarlo, quadrature, closedForm };
  Kind kind = Kind::monteCarlo;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;

  static WidthMethod monte_carlo(std::size_t trials, std::uint64_t seed) {
    return {Kind::monteCarlo, trials, seed};
  }
  static WidthMethod quadrature() { return {Kind::quadrature, 0, 0}; }
  static WidthMethod closed_form() { return {Kind::closedForm, 0, 0}; }
};

struct WidthEstimate {
  double ellK = 0.0;
  double ellK_stderr = 0.0;
};

struct BodyConstants {
  double ellK = 0.0;
  double ellK_stderr = 0.0;
  double dualSup = 0.0;
  double dStar = 0.0;
};

/// l(K) = E ||G||_K for a standard gaussian G in R^n.
///
/// quadrature (cube only) integrates 1 - (2 Phi(u) - 1)^n on
/// [0, sqrt(2 log n) + 10] and folds the analytic tail bound into the
/// reported error; closedForm covers the l_2 and l_1 balls.
WidthEstimate mean_width(const ConvexBody& body, const WidthMethod& method, Exec exec = Exec::parallel);

/// Per-trial values ||G_i||_K behind the Monte-Carlo estimate.
std::vector<double> mean_width_samples(const ConvexBody& body, std::size_t trials, std::uint64_t seed,
                                       Exec exec = Exec::parallel);

/// E max|g_i| by adaptive Gauss-Kronrod; error_bound includes the truncated tail.
struct QuadratureResult {
  double value;
  double error_bound;
};
QuadratureResult cube_width_quadrature(Index n);

BodyConstants critical_dimension(const ConvexBody& body, const WidthMethod& method, Exec exec = Exec::parallel);

}  // namespace dmlab
