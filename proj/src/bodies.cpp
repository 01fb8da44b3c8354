#include "dmlab/bodies.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dmlab/rng.hpp"

namespace dmlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double lp_norm(const Vector& x, double p) {
  if (std::isinf(p)) return x.cwiseAbs().maxCoeff();
  if (p == 1.0) return x.cwiseAbs().sum();
  if (p == 2.0) return x.norm();
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Index i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]) / scale, p);
  return scale * std::pow(acc, 1.0 / p);
}

Vector lp_dual_maximizer(const Vector& x, double p) {
  Vector t = Vector::Zero(x.size());
  if (std::isinf(p)) {
    Index arg = 0;
    x.cwiseAbs().maxCoeff(&arg);
    t[arg] = x[arg] < 0.0 ? -1.0 : 1.0;
    return t;
  }
  if (p == 1.0) {
    for (Index i = 0; i < x.size(); ++i) t[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
    return t;
  }
  const double norm = lp_norm(x, p);
  if (norm == 0.0) return t;
  for (Index i = 0; i < x.size(); ++i) {
    const double r = std::abs(x[i]) / norm;
    t[i] = std::copysign(std::pow(r, p - 1.0), x[i]);
  }
  return t;
}

// sup over t in K° of ||w o t||_2 for a coordinatewise weight w.
double weighted_dual_sup(const ConvexBody& body, const Vector& w) {
  return std::visit(
      overloaded{
          [&](const LpBall& b) {
            const double q = std::isinf(b.p) ? 1.0 : (b.p == 1.0 ? std::numeric_limits<double>::infinity()
                                                                  : b.p / (b.p - 1.0));
            if (q <= 2.0) return w.cwiseAbs().maxCoeff();
            // Hoelder with exponent q/2 on the squares: sup = ||w^2||_{r}^{1/2}, r = q/(q-2).
            const double r = std::isinf(q) ? 1.0 : q / (q - 2.0);
            Vector sq = w.cwiseAbs2();
            return std::sqrt(lp_norm(sq, r));
          },
          [&](const PolarPolytope& b) {
            double best = 0.0;
            for (Index i = 0; i < b.dual_vertices.rows(); ++i)
              best = std::max(best, b.dual_vertices.row(i).transpose().cwiseProduct(w).norm());
            return best;
          },
          [&](const DiagonalImage& b) { return weighted_dual_sup(*b.base, w.cwiseQuotient(b.scales)); },
      },
      body.kind());
}

void check_input(const ConvexBody& body, const Vector& x) {
  require(x.size() == body.dim(), "norm_K: dimension mismatch (expected " + std::to_string(body.dim()) +
                                      ", got " + std::to_string(x.size()) + ")");
  require(x.allFinite(), "norm_K: non-finite input");
}

double norm_unchecked(const ConvexBody& body, const Vector& x) {
  return std::visit(overloaded{
                        [&](const LpBall& b) { return lp_norm(x, b.p); },
                        [&](const PolarPolytope& b) { return (b.dual_vertices * x).maxCoeff(); },
                        [&](const DiagonalImage& b) {
                          return norm_unchecked(*b.base, x.cwiseQuotient(b.scales));
                        },
                    },
                    body.kind());
}

Vector maximizer_unchecked(const ConvexBody& body, const Vector& x) {
  return std::visit(overloaded{
                        [&](const LpBall& b) { return lp_dual_maximizer(x, b.p); },
                        [&](const PolarPolytope& b) -> Vector {
                          Index arg = 0;
                          (b.dual_vertices * x).maxCoeff(&arg);
                          return b.dual_vertices.row(arg).transpose();
                        },
                        [&](const DiagonalImage& b) -> Vector {
                          Vector t = maximizer_unchecked(*b.base, x.cwiseQuotient(b.scales));
                          return t.cwiseQuotient(b.scales);
                        },
                    },
                    body.kind());
}

}  // namespace

ConvexBody ConvexBody::lp_ball(double p, Index n) {
  require(n >= 1, "LpBall: dimension must be positive");
  require(p >= 1.0, "LpBall: p must lie in [1, inf]");
  return ConvexBody(LpBall{p, n}, n);
}

ConvexBody ConvexBody::polar_polytope(const Matrix& dual_vertices) {
  require(dual_vertices.rows() >= 1 && dual_vertices.cols() >= 1, "PolarPolytope: empty vertex list");
  require(dual_vertices.allFinite(), "PolarPolytope: non-finite vertex");
  std::vector<Index> missing;
  for (Index i = 0; i < dual_vertices.rows(); ++i) {
    bool found = false;
    for (Index j = 0; j < dual_vertices.rows() && !found; ++j)
      found = (dual_vertices.row(j) + dual_vertices.row(i)).cwiseAbs().maxCoeff() == 0.0;
    if (!found) missing.push_back(i);
  }
  Matrix sym(dual_vertices.rows() + static_cast<Index>(missing.size()), dual_vertices.cols());
  sym.topRows(dual_vertices.rows()) = dual_vertices;
  for (std::size_t k = 0; k < missing.size(); ++k)
    sym.row(dual_vertices.rows() + static_cast<Index>(k)) = -dual_vertices.row(missing[k]);
  require(sym.cwiseAbs().maxCoeff() > 0.0, "PolarPolytope: all dual vertices are zero");
  const Index n = sym.cols();
  return ConvexBody(PolarPolytope{std::move(sym)}, n);
}

ConvexBody ConvexBody::diagonal_image(ConvexBody base, Vector scales) {
  require(scales.size() == base.dim(), "DiagonalImage: scales dimension mismatch");
  require(scales.allFinite() && scales.minCoeff() > 0.0, "DiagonalImage: scales must be positive");
  const Index n = base.dim();
  return ConvexBody(DiagonalImage{std::make_shared<const ConvexBody>(std::move(base)), std::move(scales)}, n);
}

bool ConvexBody::is_lp(double p) const noexcept {
  const auto* b = std::get_if<LpBall>(&kind_);
  if (!b) return false;
  return std::isinf(p) ? std::isinf(b->p) : b->p == p;
}

std::string ConvexBody::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const LpBall& b) {
                   os << "LpBall(p=" << (std::isinf(b.p) ? std::string("inf") : std::to_string(b.p)) << ",n=" << b.n
                      << ")";
                 },
                 [&](const PolarPolytope& b) { os << "PolarPolytope(vertices=" << b.dual_vertices.rows() << ")"; },
                 [&](const DiagonalImage& b) { os << "DiagonalImage(" << b.base->describe() << ")"; },
             },
             kind_);
  return os.str();
}

double norm_K(const ConvexBody& body, const Vector& x) {
  check_input(body, x);
  return norm_unchecked(body, x);
}

Vector dual_maximizer(const ConvexBody& body, const Vector& x) {
  check_input(body, x);
  return maximizer_unchecked(body, x);
}

double dual_norm_sup(const ConvexBody& body) { return weighted_dual_sup(body, Vector::Ones(body.dim())); }

std::vector<double> mean_width_samples(const ConvexBody& body, std::size_t trials, std::uint64_t seed, Exec exec) {
  return map_indices<double>(exec, trials, [&](std::size_t i) {
    Rng rng = stream(seed, i);
    return norm_unchecked(body, gaussian_vector(rng, body.dim()));
  });
}

QuadratureResult cube_width_quadrature(Index n) {
  using boost::math::quadrature::gauss_kronrod;
  const double dn = static_cast<double>(n);
  const double upper = std::sqrt(2.0 * std::log(std::max(dn, 2.0))) + 10.0;
  auto integrand = [dn](double u) {
    // 1 - erf(u/sqrt2)^n, written to avoid cancellation for large u.
    const double tail = std::erfc(u / std::numbers::sqrt2);
    return -std::expm1(dn * std::log1p(-tail));
  };
  double err = 0.0;
  const double value = gauss_kronrod<double, 31>::integrate(integrand, 0.0, upper, 20, 1e-12, &err);
  const double phi = std::exp(-0.5 * upper * upper) / std::sqrt(2.0 * std::numbers::pi);
  const double tail_bound = 2.0 * dn * phi / (upper * upper);
  return {value, err + tail_bound};
}

WidthEstimate mean_width(const ConvexBody& body, const WidthMethod& method, Exec exec) {
  switch (method.kind) {
    case WidthMethod::Kind::monteCarlo: {
      require(method.trials >= 1, "mean_width: monteCarlo needs trials >= 1");
      const auto samples = mean_width_samples(body, method.trials, method.seed, exec);
      double sum = 0.0;
      for (double v : samples) sum += v;
      const double mean = sum / static_cast<double>(samples.size());
      double ss = 0.0;
      for (double v : samples) ss += (v - mean) * (v - mean);
      const double n = static_cast<double>(samples.size());
      const double stderr_ = samples.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
      return {mean, stderr_};
    }
    case WidthMethod::Kind::quadrature: {
      require(body.is_lp(std::numeric_limits<double>::infinity()),
              "mean_width: quadrature is only available for LpBall(inf)");
      const auto q = cube_width_quadrature(body.dim());
      require(q.error_bound <= 1e-6, "mean_width: quadrature did not reach 1e-6");
      return {q.value, 0.0};
    }
    case WidthMethod::Kind::closedForm: {
      const double n = static_cast<double>(body.dim());
      if (body.is_lp(2.0))
        return {std::numbers::sqrt2 * std::exp(std::lgamma((n + 1.0) / 2.0) - std::lgamma(n / 2.0)), 0.0};
      if (body.is_lp(1.0)) return {n * std::sqrt(2.0 / std::numbers::pi), 0.0};
      throw InvalidArgument("mean_width: closedForm is only available for LpBall(2) and LpBall(1)");
    }
  }
  throw InvalidArgument("mean_width: unknown method");
}

BodyConstants critical_dimension(const ConvexBody& body, const WidthMethod& method, Exec exec) {
  const WidthEstimate w = mean_width(body, method, exec);
  const double dual = dual_norm_sup(body);
  const double ratio = w.ellK / dual;
  return {w.ellK, w.ellK_stderr, dual, ratio * ratio};
}

}  // namespace dmlab
