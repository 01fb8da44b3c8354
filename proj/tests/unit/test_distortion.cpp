#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "../oracles.hpp"
#include "dmlab/bodies.hpp"
#include "dmlab/calibration.hpp"
#include "dmlab/distortion.hpp"
#include "dmlab/ensembles.hpp"
#include "dmlab/events.hpp"
#include "dmlab/nets.hpp"
#include "dmlab/rng.hpp"

using namespace dmlab;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Matrix sample(EnsembleKind k, Index n, Index d, std::uint64_t seed) {
  return sample_matrix(EnsembleSpec{k, n, d, std::nullopt, VectorLayout::rows}, seed);
}

DistortionRequest req(Estimator sup, Estimator inf, int starts = 16, std::uint64_t seed = 1) {
  DistortionRequest r;
  r.sup = sup;
  r.inf = inf;
  r.starts = starts;
  r.seed = seed;
  return r;
}

}  // namespace

TEST_CASE("estimator names round-trip") {
  for (auto e : {Estimator::exactSpectral, Estimator::exactRowNorm, Estimator::netCertified, Estimator::multiStartOpt})
    CHECK(estimator_from_string(to_string(e)) == e);
  CHECK_THROWS_AS(estimator_from_string("magic"), InvalidArgument);
}

TEST_CASE("scaled isometry has ratio one") {
  Eigen::HouseholderQR<Matrix> qr(sample(EnsembleKind::GaussianIID, 20, 4, 3));
  const Matrix g = 2.5 * (qr.householderQ() * Matrix::Identity(20, 4));
  const auto body = ConvexBody::lp_ball(2, 20);
  const auto spec = measure_distortion(body, g, req(Estimator::exactSpectral, Estimator::exactSpectral), 1.0);
  CHECK(spec.supEst == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(spec.infEst == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(spec.ratio == doctest::Approx(1.0).epsilon(1e-12));
  const auto opt = measure_distortion(body, g, req(Estimator::multiStartOpt, Estimator::multiStartOpt), 1.0);
  CHECK(opt.ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exactSpectral agrees with singular_extremes") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Matrix g = sample(EnsembleKind::GaussianIID, 80, 10, 40 + s);
    const auto rep = measure_distortion(ConvexBody::lp_ball(2, 80), g, req(Estimator::exactSpectral, Estimator::exactSpectral), 1.0);
    const auto ext = singular_extremes(g);
    CHECK(std::abs(rep.supEst - ext.lambdaMax) <= 1e-9 * ext.lambdaMax);
    CHECK(std::abs(rep.infEst - ext.lambdaMin) <= 1e-9 * ext.lambdaMin);
  }
}

TEST_CASE("gaussian ratio follows the Bai-Yin edges") {
  std::vector<double> ratios;
  const auto body = ConvexBody::lp_ball(2, 256);
  for (std::uint64_t s = 0; s < 100; ++s)
    ratios.push_back(measure_distortion(body, sample(EnsembleKind::GaussianIID, 256, 16, 500 + s),
                                        req(Estimator::exactSpectral, Estimator::exactSpectral), 1.0)
                         .ratio);
  CHECK(oracle::median(ratios) <= oracle::bai_yin_ratio(256, 16) + 0.1);
}

TEST_CASE("row-norm supremum on the cube") {
  const Index n = 24, d = 5;
  const auto body = ConvexBody::cube(n);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Matrix g = sample(EnsembleKind::UniformPM1, n, d, 60 + s);
    const auto exact = measure_distortion(body, g, req(Estimator::exactRowNorm, Estimator::multiStartOpt, 4), 1.0);
    const auto opt = measure_distortion(body, g, req(Estimator::multiStartOpt, Estimator::multiStartOpt, static_cast<int>(n)), 1.0);
    CHECK(exact.supEst >= opt.supEst - 1e-12);
    CHECK(opt.supEst == doctest::Approx(exact.supEst).epsilon(1e-9));
  }
}

TEST_CASE("multistart is monotone over nested start sets") {
  const Index n = 40, d = 6;
  const auto body = ConvexBody::lp_ball(1.5, n);
  const Matrix g = sample(EnsembleKind::GaussianIID, n, d, 70);
  double prev_sup = 0.0, prev_inf = kInf;
  for (int starts : {0, 2, 8, 32}) {
    const auto rep = measure_distortion(body, g, req(Estimator::multiStartOpt, Estimator::multiStartOpt, starts, 9), 1.0);
    CHECK(rep.supEst >= prev_sup);
    CHECK(rep.infEst <= prev_inf);
    prev_sup = rep.supEst;
    prev_inf = rep.infEst;
  }
}

TEST_CASE("net-certified slacks point outward") {
  const Index n = 30, d = 3;
  const auto net = build_sphere_net(d, 0.5, 1000000, 5);
  const auto body = ConvexBody::cube(n);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Matrix g = sample(EnsembleKind::UniformPM1, n, d, 80 + s);
    auto r = req(Estimator::netCertified, Estimator::netCertified);
    r.net = &net;
    const auto rep = measure_distortion(body, g, r, 1.0);
    CHECK(rep.supEst >= rep.netMax);
    CHECK(rep.infEst <= rep.netMin);
    const double exact = g.rowwise().norm().maxCoeff();
    CHECK(rep.supEst >= exact - 1e-12);
    CHECK(rep.methodTags().find("netCertified") != std::string::npos);
  }
}

TEST_CASE("net-certified preconditions") {
  const auto body = ConvexBody::cube(10);
  const Matrix g = sample(EnsembleKind::UniformPM1, 10, 3, 1);
  CHECK_THROWS_AS(measure_distortion(body, g, req(Estimator::netCertified, Estimator::multiStartOpt), 1.0), InvalidArgument);
  const auto wrong = build_sphere_net(2, 0.5, 1000, 1);
  auto r = req(Estimator::netCertified, Estimator::multiStartOpt);
  r.net = &wrong;
  CHECK_THROWS_AS(measure_distortion(body, g, r, 1.0), InvalidArgument);
  CHECK_THROWS_AS(measure_distortion(body, g, req(Estimator::exactSpectral, Estimator::multiStartOpt), 1.0), InvalidArgument);
  CHECK_THROWS_AS(measure_distortion(ConvexBody::lp_ball(2, 10), g, req(Estimator::exactRowNorm, Estimator::multiStartOpt), 1.0),
                  InvalidArgument);
  CHECK_THROWS_AS(measure_distortion(body, g, req(Estimator::multiStartOpt, Estimator::exactRowNorm), 1.0), InvalidArgument);
  CHECK_THROWS_AS(measure_distortion(ConvexBody::cube(11), g, req(Estimator::multiStartOpt, Estimator::multiStartOpt), 1.0),
                  InvalidArgument);
}

TEST_CASE("heuristic tags are visible") {
  const auto body = ConvexBody::lp_ball(2, 8);
  const auto rep = measure_distortion(body, sample(EnsembleKind::GaussianIID, 8, 2, 1),
                                      req(Estimator::exactSpectral, Estimator::multiStartOpt, 4), 1.0);
  CHECK(rep.methodTags() == "sup=exactSpectral;inf=multiStartOpt(4,heuristic)");
}

TEST_CASE("normalized values and zero infimum") {
  const auto body = ConvexBody::lp_ball(2, 6);
  Matrix g = Matrix::Zero(6, 2);
  g(0, 0) = 1.0;
  const auto rep = measure_distortion(body, g, req(Estimator::exactSpectral, Estimator::exactSpectral), 2.0);
  CHECK(rep.ratio == kInf);
  CHECK(rep.normalizedSup == 0.5);
  CHECK(rep.normalizedInf == 0.0);
}

TEST_CASE("adversarial witness on exact inputs") {
  Matrix col(5, 1);
  col << 0.3, -0.9, 0.1, 0.2, 0.5;
  auto w = adversarial_linf_witness(col);
  CHECK(std::abs(w.eta[0]) == 1.0);
  CHECK(w.phiWitness == doctest::Approx(w.phiE1));
  CHECK(w.ratio == doctest::Approx(1.0));

  const auto ones = adversarial_linf_witness(Matrix::Ones(7, 9));
  CHECK(ones.phiWitness == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(ones.phiE1 == 1.0);
  CHECK(ones.ratio == doctest::Approx(3.0).epsilon(1e-15));

  Matrix zero_first = Matrix::Ones(3, 2);
  zero_first.col(0).setZero();
  CHECK(adversarial_linf_witness(zero_first).ratio == kInf);
}

TEST_CASE("cube witness scales like sqrt(d)") {
  int ok = 0;
  for (std::uint64_t s = 0; s < 100; ++s) ok += adversarial_linf_witness(sample(EnsembleKind::UniformPM1, 1024, 64, 900 + s)).ratio >= 3.2;
  CHECK(ok >= 95);
}

TEST_CASE("gaussian normalized values sit in the calibrated band for small d") {
  const auto& cal = default_calibration();
  const Index n = 512;
  const auto body = ConvexBody::lp_ball(2, n);
  const auto c = critical_dimension(body, WidthMethod::closed_form());
  const Index d = std::max<Index>(1, static_cast<Index>(cal.gaussianBandDFraction * c.dStar));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto rep = measure_distortion(body, sample(EnsembleKind::GaussianIID, n, d, 300 + s),
                                        req(Estimator::exactSpectral, Estimator::exactSpectral), c.ellK);
    CHECK(rep.normalizedSup <= cal.gaussianBandHi);
    CHECK(rep.normalizedInf >= cal.gaussianBandLo);
  }
}

TEST_CASE("serial and parallel distortion agree bitwise") {
  const auto body = ConvexBody::lp_ball(3, 50);
  const Matrix g = sample(EnsembleKind::GaussianIID, 50, 5, 2);
  const auto net = build_sphere_net(5, 0.5, 20000, 3, 1000);
  auto r = req(Estimator::multiStartOpt, Estimator::multiStartOpt, 12, 4);
  const auto a = measure_distortion(body, g, r, 1.0, Exec::serial);
  const auto b = measure_distortion(body, g, r, 1.0, Exec::parallel);
  CHECK(a.supEst == b.supEst);
  CHECK(a.infEst == b.infEst);
  CHECK(evaluate_on_net(body, g, net.points, Exec::serial) == evaluate_on_net(body, g, net.points, Exec::parallel));
}
