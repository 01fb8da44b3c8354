#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "../oracles.hpp"
#include "dmlab/bodies.hpp"
#include "dmlab/rng.hpp"

using namespace dmlab;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("norm_K on small examples") {
  CHECK(norm_K(ConvexBody::lp_ball(kInf, 4), vec({1, -2, 0.5, 0})) == 2.0);
  CHECK(norm_K(ConvexBody::lp_ball(2, 3), vec({3, 4, 0})) == doctest::Approx(5.0).epsilon(1e-15));
  Matrix dual(2, 2);
  dual << 1, 0, 0, 1;
  CHECK(norm_K(ConvexBody::polar_polytope(dual), vec({1, 1})) == 1.0);
  CHECK(norm_K(ConvexBody::lp_ball(1, 3), vec({1, -2, 3})) == doctest::Approx(6.0));
  CHECK(norm_K(ConvexBody::lp_ball(3, 2), vec({1, 1})) == doctest::Approx(std::cbrt(2.0)));
}

TEST_CASE("norm_K rejects bad input") {
  CHECK_THROWS_AS(norm_K(ConvexBody::lp_ball(2, 3), vec({1, 2})), InvalidArgument);
  CHECK_THROWS_AS(ConvexBody::lp_ball(0.5, 3), InvalidArgument);
  CHECK_THROWS_AS(ConvexBody::lp_ball(2, 0), InvalidArgument);
}

TEST_CASE("polytope evaluator is exact on its own vertices") {
  Rng rng = stream(11, 0);
  Matrix dual(7, 5);
  for (Index r = 0; r < dual.rows(); ++r) dual.row(r) = gaussian_vector(rng, 5).transpose();
  const auto body = ConvexBody::polar_polytope(dual);
  for (int t = 0; t < 50; ++t) {
    const Vector x = gaussian_vector(rng, 5);
    double best = 0.0;
    for (Index r = 0; r < dual.rows(); ++r) best = std::max({best, dual.row(r).dot(x), -dual.row(r).dot(x)});
    CHECK(norm_K(body, x) == doctest::Approx(best).epsilon(1e-14));
  }
}

TEST_CASE("dual_maximizer attains the norm") {
  Rng rng = stream(12, 0);
  for (double p : {1.0, 1.5, 2.0, 4.0, kInf}) {
    const auto body = ConvexBody::lp_ball(p, 6);
    const Vector x = gaussian_vector(rng, 6);
    const Vector t = dual_maximizer(body, x);
    CHECK(t.dot(x) == doctest::Approx(norm_K(body, x)).epsilon(1e-12));
  }
}

TEST_CASE("dual_norm_sup values") {
  CHECK(dual_norm_sup(ConvexBody::lp_ball(kInf, 10)) == doctest::Approx(1.0));
  CHECK(dual_norm_sup(ConvexBody::lp_ball(2, 10)) == doctest::Approx(1.0));
  CHECK(dual_norm_sup(ConvexBody::lp_ball(1, 16)) == doctest::Approx(4.0));
}

TEST_CASE("closed-form mean widths") {
  const auto b2 = mean_width(ConvexBody::lp_ball(2, 100), WidthMethod::closed_form());
  CHECK(b2.ellK == doctest::Approx(oracle::gaussian_norm_mean(100)).epsilon(1e-12));
  CHECK(b2.ellK == doctest::Approx(9.9749).epsilon(1e-4));
  const auto b1 = mean_width(ConvexBody::lp_ball(1, 100), WidthMethod::closed_form());
  CHECK(b1.ellK == doctest::Approx(100.0 * std::sqrt(2.0 / M_PI)).epsilon(1e-12));
  CHECK_THROWS_AS(mean_width(ConvexBody::lp_ball(3, 10), WidthMethod::closed_form()), InvalidArgument);
}

TEST_CASE("cube quadrature against an independent Simpson rule") {
  for (long n : {1L, 10L, 1000L, 100000L}) {
    const auto q = cube_width_quadrature(n);
    CHECK(q.value == doctest::Approx(oracle::cube_width(n)).epsilon(1e-8));
    CHECK(q.error_bound < 1e-8);
  }
  CHECK(cube_width_quadrature(1).value == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-10));
}

TEST_CASE("quadrature and Monte Carlo agree on the cube") {
  const auto body = ConvexBody::cube(1000);
  const auto q = mean_width(body, WidthMethod::quadrature());
  const auto mc = mean_width(body, WidthMethod::monte_carlo(10000, 5));
  CHECK(std::abs(q.ellK - mc.ellK) / q.ellK < 0.02);
}

TEST_CASE("Monte Carlo agrees with closed forms within 4 standard errors") {
  int within = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    for (double p : {1.0, 2.0}) {
      const auto body = ConvexBody::lp_ball(p, 20);
      const double exact = mean_width(body, WidthMethod::closed_form()).ellK;
      const auto mc = mean_width(body, WidthMethod::monte_carlo(400, 1000 + s), Exec::serial);
      within += std::abs(mc.ellK - exact) <= 4.0 * mc.ellK_stderr;
    }
  }
  CHECK(within == 200);
}

TEST_CASE("critical dimension") {
  for (long n : {5L, 50L, 500L}) {
    const auto c = critical_dimension(ConvexBody::lp_ball(2, n), WidthMethod::closed_form());
    CHECK(c.dStar >= static_cast<double>(n) - 1.0);
    CHECK(c.dStar <= static_cast<double>(n));
  }
  const auto l1 = critical_dimension(ConvexBody::lp_ball(1, 64), WidthMethod::closed_form());
  CHECK(l1.dStar == doctest::Approx(2.0 * 64 / M_PI).epsilon(1e-12));
  const auto l1mc = critical_dimension(ConvexBody::lp_ball(1, 64), WidthMethod::monte_carlo(20000, 3));
  CHECK(std::abs(l1mc.dStar - 2.0 * 64 / M_PI) < 4.0 * 2.0 * l1mc.ellK_stderr * l1mc.ellK / 64.0);

  // log-linear growth for the cube: slope of dStar against log n near 2.
  std::vector<double> xs, ys;
  for (long n : {100L, 1000L, 10000L}) {
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(critical_dimension(ConvexBody::cube(n), WidthMethod::quadrature()).dStar);
  }
  const double slope = (ys[2] - ys[0]) / (xs[2] - xs[0]);
  CHECK(slope > 1.0);
  CHECK(slope < 2.5);
  CHECK(ys[1] - ys[0] == doctest::Approx(ys[2] - ys[1]).epsilon(0.2));
}

TEST_CASE("identity diagonal image leaves constants unchanged") {
  const auto base = ConvexBody::lp_ball(1.5, 12);
  const auto img = ConvexBody::diagonal_image(base, Vector::Ones(12));
  const auto a = critical_dimension(base, WidthMethod::monte_carlo(4000, 9));
  const auto b = critical_dimension(img, WidthMethod::monte_carlo(4000, 9));
  CHECK(a.dStar == b.dStar);
  Vector scales = Vector::Constant(12, 2.0);
  const auto scaled = ConvexBody::diagonal_image(base, scales);
  Rng rng = stream(1, 1);
  const Vector x = gaussian_vector(rng, 12);
  CHECK(norm_K(scaled, x) == doctest::Approx(norm_K(base, x) / 2.0));
}
