#include "dmlab/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dmlab/events.hpp"
#include "dmlab/rng.hpp"

namespace dmlab {

namespace {

constexpr double kMinStep = 1e-12;
constexpr double kPhiFloor = 1e-300;

double objective(const ConvexBody& body, const Matrix& gamma, const Vector& x) { return norm_K(body, gamma * x); }

}  // namespace

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::exactSpectral: return "exactSpectral";
    case Estimator::exactRowNorm: return "exactRowNorm";
    case Estimator::netCertified: return "netCertified";
    case Estimator::multiStartOpt: return "multiStartOpt";
  }
  return "unknown";
}

Estimator estimator_from_string(const std::string& name) {
  for (auto e : {Estimator::exactSpectral, Estimator::exactRowNorm, Estimator::netCertified, Estimator::multiStartOpt})
    if (to_string(e) == name) return e;
  throw InvalidArgument("unknown distortion method '" + name + "'");
}

std::string DistortionReport::methodTags() const {
  auto tag = [&](Estimator e) {
    std::string s = to_string(e);
    if (e == Estimator::multiStartOpt) s += "(" + std::to_string(starts) + ",heuristic)";
    if (e == Estimator::netCertified) s += "(rho=" + std::to_string(netRho) + ",size=" + std::to_string(netSize) + ")";
    return s;
  };
  return "sup=" + tag(supMethod) + ";inf=" + tag(infMethod);
}

Vector evaluate_on_net(const ConvexBody& body, const Matrix& gamma, const Matrix& points, Exec exec) {
  const auto values = map_indices<double>(exec, static_cast<std::size_t>(points.rows()), [&](std::size_t i) {
    return objective(body, gamma, points.row(static_cast<Index>(i)).transpose());
  });
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

OptimizerTrace optimize_on_sphere(const ConvexBody& body, const Matrix& gamma, Vector start, bool maximize,
                                  int maxIterations) {
  OptimizerTrace tr;
  tr.x = start.normalized();
  tr.value = objective(body, gamma, tr.x);
  double step = 0.5;
  for (tr.iterations = 0; tr.iterations < maxIterations && step >= kMinStep; ++tr.iterations) {
    const Vector g = gamma.transpose() * dual_maximizer(body, gamma * tr.x);
    const Vector tangent = g - g.dot(tr.x) * tr.x;
    const double tnorm = tangent.norm();
    if (tnorm <= 1e-15 * std::max(g.norm(), 1e-300)) break;

    if (maximize && g.norm() > 0.0) {
      // Jump to the maximizer of the current linear minorant.
      const Vector jump = g.normalized();
      const double v = objective(body, gamma, jump);
      if (v > tr.value) {
        tr.x = jump;
        tr.value = v;
        continue;
      }
    }
    const double sign = maximize ? 1.0 : -1.0;
    const Vector cand = (tr.x + sign * step * tangent / tnorm).normalized();
    const double v = objective(body, gamma, cand);
    if (maximize ? v > tr.value : v < tr.value) {
      tr.x = cand;
      tr.value = v;
    } else {
      step *= 0.5;
    }
  }
  return tr;
}

DistortionReport measure_distortion(const ConvexBody& body, const Matrix& gamma, const DistortionRequest& request,
                                    double ellK, Exec exec) {
  require(gamma.rows() == body.dim(), "measure_distortion: Gamma rows must equal the body dimension");
  require(gamma.cols() >= 1, "measure_distortion: Gamma has no columns");
  require(request.inf != Estimator::exactRowNorm, "measure_distortion: exactRowNorm only estimates the supremum");
  const Index d = gamma.cols();
  for (Estimator e : {request.sup, request.inf}) {
    if (e == Estimator::exactSpectral) require(body.is_lp(2.0), "measure_distortion: exactSpectral needs LpBall(2)");
    if (e == Estimator::exactRowNorm)
      require(body.is_lp(std::numeric_limits<double>::infinity()), "measure_distortion: exactRowNorm needs LpBall(inf)");
    if (e == Estimator::netCertified) {
      require(request.net != nullptr, "measure_distortion: netCertified needs a net");
      require(request.net->dim == d, "measure_distortion: net dimension differs from d");
      require(request.net->coveringRadiusEstimate <= request.net->rho,
              "measure_distortion: net covering radius estimate exceeds rho");
    }
    if (e == Estimator::multiStartOpt) require(request.starts >= 0, "measure_distortion: starts must be >= 0");
  }

  DistortionReport rep;
  rep.supMethod = request.sup;
  rep.infMethod = request.inf;
  rep.ellK = ellK;
  rep.seed = request.seed;

  const bool wants_spectral = request.sup == Estimator::exactSpectral || request.inf == Estimator::exactSpectral;
  double spec_min = 0.0, spec_max = 0.0;
  if (wants_spectral) {
    if (std::min(gamma.rows(), gamma.cols()) <= kFullDecompositionDim) {
      const Vector sv = singular_values(gamma);
      spec_max = sv.maxCoeff();
      spec_min = sv.minCoeff();
    } else {
      const auto ext = singular_extremes(gamma);
      spec_max = ext.lambdaMax;
      spec_min = ext.lambdaMin;
    }
  }

  const bool wants_net = request.sup == Estimator::netCertified || request.inf == Estimator::netCertified;
  double cert_sup = 0.0, cert_inf = 0.0;
  if (wants_net) {
    const SphereNet& net = *request.net;
    const Vector values = evaluate_on_net(body, gamma, net.points, exec);
    rep.netRho = net.rho;
    rep.netSize = net.size();
    rep.netMax = values.maxCoeff();
    rep.netMin = values.minCoeff();
    cert_sup = rep.netMax / (1.0 - net.rho);
    rep.lipschitzSlack = net.rho * cert_sup;
    cert_inf = rep.netMin - rep.lipschitzSlack;
  }

  const bool wants_opt = request.sup == Estimator::multiStartOpt || request.inf == Estimator::multiStartOpt;
  double opt_sup = 0.0, opt_inf = 0.0;
  if (wants_opt) {
    rep.starts = request.starts;
    const std::size_t total = static_cast<std::size_t>(request.starts) + 2 * static_cast<std::size_t>(d);
    struct Pair {
      double hi = 0.0, lo = 0.0;
    };
    const bool need_hi = request.sup == Estimator::multiStartOpt;
    const bool need_lo = request.inf == Estimator::multiStartOpt;
    const auto runs = map_indices<Pair>(exec, total, [&](std::size_t s) {
      Vector x0;
      if (s < static_cast<std::size_t>(request.starts)) {
        Rng rng = stream(request.seed, s);
        x0 = unit_sphere_point(rng, d);
      } else {
        const std::size_t j = s - static_cast<std::size_t>(request.starts);
        x0 = Vector::Unit(d, static_cast<Index>(j / 2)) * ((j % 2 == 0) ? 1.0 : -1.0);
      }
      Pair p;
      if (need_hi) p.hi = optimize_on_sphere(body, gamma, x0, true, request.maxIterations).value;
      if (need_lo) p.lo = optimize_on_sphere(body, gamma, x0, false, request.maxIterations).value;
      return p;
    });
    opt_sup = -std::numeric_limits<double>::infinity();
    opt_inf = std::numeric_limits<double>::infinity();
    for (const auto& p : runs) {
      opt_sup = std::max(opt_sup, p.hi);
      opt_inf = std::min(opt_inf, p.lo);
    }
  }

  switch (request.sup) {
    case Estimator::exactSpectral: rep.supEst = spec_max; break;
    case Estimator::exactRowNorm: rep.supEst = gamma.rowwise().norm().maxCoeff(); break;
    case Estimator::netCertified: rep.supEst = cert_sup; break;
    case Estimator::multiStartOpt: rep.supEst = opt_sup; break;
  }
  switch (request.inf) {
    case Estimator::exactSpectral: rep.infEst = spec_min; break;
    case Estimator::netCertified:
      rep.infEst = cert_inf;
      rep.infWarning = cert_inf <= 0.0;
      break;
    case Estimator::multiStartOpt: rep.infEst = opt_inf; break;
    case Estimator::exactRowNorm: break;
  }

  if (rep.infEst > 0.0)
    rep.ratio = rep.supEst / rep.infEst;
  else
    rep.ratio = std::numeric_limits<double>::infinity();
  if (ellK > 0.0) {
    rep.normalizedSup = rep.supEst / ellK;
    rep.normalizedInf = rep.infEst / ellK;
  }
  return rep;
}

CubeWitness adversarial_linf_witness(const Matrix& m) {
  require(m.rows() >= 1 && m.cols() >= 1, "adversarial_linf_witness: empty matrix");
  CubeWitness w;
  m.cwiseAbs().rowwise().sum().maxCoeff(&w.iStar);
  const Index d = m.cols();
  w.eta.resize(d);
  for (Index j = 0; j < d; ++j) w.eta[j] = m(w.iStar, j) < 0.0 ? -1.0 : 1.0;
  w.phiWitness = (m * w.eta).cwiseAbs().maxCoeff() / std::sqrt(static_cast<double>(d));
  w.phiE1 = m.col(0).cwiseAbs().maxCoeff();
  if (w.phiE1 < kPhiFloor && w.phiWitness > 0.0)
    w.ratio = std::numeric_limits<double>::infinity();
  else
    w.ratio = w.phiWitness / std::max(w.phiE1, kPhiFloor);
  return w;
}

}  // namespace dmlab
