#pragma once

#include <cstdint>
#include <string>

#include "dmlab/bodies.hpp"
#include "dmlab/nets.hpp"
#include "dmlab/parallel.hpp"
#include "dmlab/types.hpp"

namespace dmlab {

enum class Estimator { exactSpectral, exactRowNorm, netCertified, multiStartOpt };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& name);

struct DistortionRequest {
  Estimator sup = Estimator::multiStartOpt;
  Estimator inf = Estimator::multiStartOpt;
  const SphereNet* net = nullptr;
  int starts = 64;
  int maxIterations = 500;
  std::uint64_t seed = 0;
};

struct DistortionReport {
  double supEst = 0.0;
  double infEst = 0.0;
  Estimator supMethod = Estimator::multiStartOpt;
  Estimator infMethod = Estimator::multiStartOpt;
  double ratio = 0.0;
  double ellK = 0.0;
  double normalizedSup = 0.0;
  double normalizedInf = 0.0;

  // netCertified provenance
  double netRho = 0.0;
  std::size_t netSize = 0;
  double netMax = 0.0;
  double netMin = 0.0;
  double lipschitzSlack = 0.0;  // amount subtracted from the net minimum
  bool infWarning = false;      // certified infimum is <= 0 after slack

  // multiStartOpt provenance
  int starts = 0;
  std::uint64_t seed = 0;

  /// "sup=<method>;inf=<method>" with heuristic estimates marked.
  std::string methodTags() const;
};

/// Estimates sup and inf of x -> ||Gamma x||_K over S^{d-1} and normalizes by ellK.
///
/// exactSpectral (l_2 ball): extreme singular values. exactRowNorm (cube, sup
/// only): the largest row norm. netCertified: max over the net inflated by
/// 1/(1-rho); min over the net minus rho times that certified sup.
/// multiStartOpt: best of projected-subgradient runs from `starts` random
/// starts plus all +-e_i (heuristic in the direction it does not bound).
DistortionReport measure_distortion(const ConvexBody& body, const Matrix& gamma, const DistortionRequest& request,
                                    double ellK, Exec exec = Exec::parallel);

/// ||Gamma x||_K at every net point.
Vector evaluate_on_net(const ConvexBody& body, const Matrix& gamma, const Matrix& points, Exec exec = Exec::parallel);

struct OptimizerTrace {
  Vector x;
  double value = 0.0;
  int iterations = 0;
};

/// One projected-subgradient run on the sphere; `maximize` picks the direction.
OptimizerTrace optimize_on_sphere(const ConvexBody& body, const Matrix& gamma, Vector start, bool maximize,
                                  int maxIterations);

struct CubeWitness {
  Index iStar = 0;
  Vector eta;
  double phiWitness = 0.0;
  double phiE1 = 0.0;
  double ratio = 0.0;
};

/// Sign vector of the row with the largest l_1 norm, evaluated against e_1:
/// phiWitness = ||M eta||_inf / sqrt(d), phiE1 = ||M e_1||_inf.
CubeWitness adversarial_linf_witness(const Matrix& m);

}  // namespace dmlab
