#include "dmlab/params.hpp"

#include <algorithm>
#include <cmath>

#include "dmlab/types.hpp"

namespace dmlab {

double theta_exponent(double q, ExponentReading reading) {
  return reading == ExponentReading::grouped ? (q - 2.0) / (2.0 * (q + 2.0)) : (q - 2.0) / 2.0 * (q + 2.0);
}

double theta_constraint(double theta, double q, ExponentReading reading) {
  return std::pow(theta, theta_exponent(q, reading)) * std::sqrt(std::log(std::exp(1.0) / theta));
}

double theta_peak(double q, ExponentReading reading) { return std::exp(1.0 - 1.0 / (2.0 * theta_exponent(q, reading))); }

bool delta_constraint_holds(const ParameterSolution& s) {
  return s.delta > 0.0 && s.delta < 0.25 && s.delta <= s.constants.c1 / std::log(5.0 / s.rho);
}

bool theta_constraint_holds(const ParameterSolution& s) {
  return s.theta > 0.0 && s.theta < 0.25 &&
         theta_constraint(s.theta, s.q, s.reading) <= s.constants.c2 / std::log(5.0 / s.rho);
}

ParameterSolution solve_parameters(double rho, double q, double dStar, long long n, const ParameterConstants& constants,
                                   ExponentReading reading) {
  require(rho > 0.0 && rho < 0.25, "solve_parameters: rho must lie in (0, 1/4)");
  require(q > 2.0, "solve_parameters: q must exceed 2");
  require(dStar > 0.0, "solve_parameters: dStar must be positive");
  require(n >= 1, "solve_parameters: n must be >= 1");

  ParameterSolution s;
  s.rho = rho;
  s.q = q;
  s.constants = constants;
  s.reading = reading;
  const double log5 = std::log(5.0 / rho);

  s.delta = std::min(constants.c1 / log5, kOpenIntervalClamp);

  const double target = constants.c2 / log5;
  const double hi_limit = std::min(kOpenIntervalClamp, theta_peak(q, reading));
  if (!(target > 0.0)) {
    s.feasible = false;
    s.reason = "theta constraint unsatisfiable";
    return s;
  }
  if (theta_constraint(hi_limit, q, reading) <= target) {
    s.theta = hi_limit;
  } else {
    double lo = 0.0, hi = hi_limit;
    while (hi - lo > kThetaTolerance) {
      const double mid = 0.5 * (lo + hi);
      if (theta_constraint(mid, q, reading) <= target)
        lo = mid;
      else
        hi = mid;
    }
    s.theta = lo;
  }
  if (!(s.theta > 0.0)) {
    s.feasible = false;
    s.reason = "theta constraint unsatisfiable";
    return s;
  }

  s.dRaw = constants.c3 * std::pow(s.theta, 4.0 / (2.0 + q)) / std::pow(log5, 5.0) * dStar;
  const long long rounded = std::llround(s.dRaw);
  s.d = std::max(1LL, rounded);
  s.m = static_cast<long long>(std::ceil(constants.c0 * std::max(dStar / rho, static_cast<double>(n))));
  if (rounded < 1) {
    s.feasible = false;
    s.reason = "d<1";
    return s;
  }
  s.feasible = true;
  return s;
}

}  // namespace dmlab
