#pragma once

#include <string>

namespace dmlab {

/// Constants frozen from a pilot run (see tools/calibrate.cpp). None of these
/// are claims about the true absolute constants; they are fitted once on a
/// pilot corpus whose seeds are disjoint from the acceptance seeds.
struct Calibration {
  std::string version = "uncalibrated";
  double cSud = 0.5;
  double C_chain = 1.0;
  double concentration_c = 0.1;
  double paourisC1 = 2.0;
  double subgaussianSparseC = 1.0;  // sparseSup(k) <= C sqrt(d + k log(em/k))
  double heavyTailedC = 1.0;        // sparseSup(k) <= C (sqrt(beta) max ||X_i|| + (mk)^{1/4})
  double beta = 1.0;
  double gaussianBandLo = 0.5;      // normalized sup/inf band for d <= dFraction dStar
  double gaussianBandHi = 1.5;
  double gaussianBandDFraction = 0.1;
};

Calibration load_calibration(const std::string& path);
/// Path baked in at build time (config/calibration.json in the source tree).
std::string default_calibration_path();
const Calibration& default_calibration();

}  // namespace dmlab
