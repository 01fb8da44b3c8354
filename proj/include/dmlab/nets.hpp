#pragma once

#include <cstdint>
#include <vector>

#include "dmlab/parallel.hpp"
#include "dmlab/types.hpp"

namespace dmlab {

struct SphereNet {
  Index dim = 0;
  double rho = 0.0;
  Matrix points;  // one unit vector per row
  bool separationCertified = false;
  double coveringRadiusEstimate = 0.0;
  /// Set when the probe sample found a point farther than rho from the net.
  bool coveringWarning = false;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
};

/// log of the volumetric cap exp(d log(5/rho)) on the size of a rho-separated
/// subset of S^{d-1}.
double volumetric_log_bound(Index dim, double rho);

/// Greedy packing: the candidates +-e_i followed by `candidateBudget` uniform
/// sphere points are scanned in order and accepted iff they are at distance
/// >= rho from every accepted point. The covering radius is then estimated on
/// `coveringProbes` fresh uniform points. Each of the `repairRounds` extra
/// passes draws `coveringProbes` points and offers those not yet covered,
/// which keeps separation and pushes the packing towards maximality.
SphereNet build_sphere_net(Index dim, double rho, std::size_t candidateBudget, std::uint64_t seed,
                           std::size_t coveringProbes = 20000, Exec exec = Exec::parallel,
                           std::size_t repairRounds = 0);

/// max over the rows of `probes` of the distance to the nearest net point.
double covering_radius(const Matrix& net, const Matrix& probes, Exec exec = Exec::parallel);

/// Farthest-first traversal from the first point: repeatedly adds the point
/// farthest from the current subset while that distance is >= epsilon and
/// positive, stopping at maxSize. Returns indices in selection order.
std::vector<Index> pajor_subset(const Matrix& points, double epsilon, std::size_t maxSize);

}  // namespace dmlab
