#pragma once

#include <string>

namespace dmlab {

/// How "(q-2)/2(q+2)" is read: grouped = (q-2)/(2(q+2)), literal = ((q-2)/2)(q+2).
enum class ExponentReading { grouped, literal };

struct ParameterConstants {
  double c0 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
};

inline constexpr double kOpenIntervalClamp = 0.2499;
inline constexpr double kThetaTolerance = 1e-10;

struct ParameterSolution {
  double rho = 0.0;
  double q = 0.0;
  double theta = 0.0;
  double delta = 0.0;
  long long m = 0;
  long long d = 0;
  double dRaw = 0.0;  // c3 theta^(4/(2+q)) / log^5(5/rho) dStar, before rounding
  ParameterConstants constants;
  ExponentReading reading = ExponentReading::grouped;
  bool feasible = false;
  std::string reason;
};

/// Exponent a of theta in the theta-constraint.
double theta_exponent(double q, ExponentReading reading);

/// f(theta) = theta^a sqrt(log(e/theta)).
double theta_constraint(double theta, double q, ExponentReading reading);

/// Right end of the interval on which f is increasing: exp(1 - 1/(2a)).
double theta_peak(double q, ExponentReading reading);

bool delta_constraint_holds(const ParameterSolution& s);
bool theta_constraint_holds(const ParameterSolution& s);

/// delta = min(c1/log(5/rho), 0.2499); theta = the largest value in
/// (0, min(0.2499, theta_peak)] with f(theta) <= c2/log(5/rho), by bisection;
/// d = round(c3 theta^(4/(2+q)) dStar / log^5(5/rho)), floored at 1;
/// m = ceil(c0 max(dStar/rho, n)).
ParameterSolution solve_parameters(double rho, double q, double dStar, long long n,
                                   const ParameterConstants& constants = {},
                                   ExponentReading reading = ExponentReading::grouped);

}  // namespace dmlab
