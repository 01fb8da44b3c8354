#include "dmlab/calibration.hpp"

#include <fstream>
#include <json.hpp>

#include "dmlab/types.hpp"

#ifndef DMLAB_CALIBRATION_FILE
#define DMLAB_CALIBRATION_FILE "config/calibration.json"
#endif

namespace dmlab {

Calibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open calibration file '" + path + "'");
  const auto j = nlohmann::json::parse(in);
  Calibration c;
  c.version = j.at("version").get<std::string>();
  c.cSud = j.at("cSud").get<double>();
  c.C_chain = j.at("C_chain").get<double>();
  c.concentration_c = j.at("concentration_c").get<double>();
  c.paourisC1 = j.at("paourisC1").get<double>();
  c.subgaussianSparseC = j.at("subgaussianSparseC").get<double>();
  c.heavyTailedC = j.at("heavyTailedC").get<double>();
  c.beta = j.at("beta").get<double>();
  const auto& band = j.at("gaussianBand");
  c.gaussianBandLo = band.at("lo").get<double>();
  c.gaussianBandHi = band.at("hi").get<double>();
  c.gaussianBandDFraction = band.at("dFraction").get<double>();
  return c;
}

std::string default_calibration_path() { return DMLAB_CALIBRATION_FILE; }

const Calibration& default_calibration() {
  static const Calibration c = load_calibration(default_calibration_path());
  return c;
}

}  // namespace dmlab
