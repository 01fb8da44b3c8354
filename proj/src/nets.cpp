#include "dmlab/nets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "dmlab/rng.hpp"

namespace dmlab {

namespace {

// Cell hash over the cube [-1,1]^d with cell side rho. Two points at distance
// < rho lie in adjacent cells, so only 3^d neighbours need scanning.
class CellGrid {
 public:
  CellGrid(Index dim, double rho) : dim_(dim), rho_(rho) {}

  static bool usable(Index dim) { return dim <= 6; }

  void insert(const Vector& p, Index id) { cells_[key(cell_of(p))].push_back(id); }

  template <class Fn>
  bool any_neighbour(const Vector& p, Fn&& fn) const {
    const auto base = cell_of(p);
    std::vector<int> offset(static_cast<std::size_t>(dim_), -1);
    std::vector<long> c(base.size());
    for (;;) {
      for (std::size_t k = 0; k < base.size(); ++k) c[k] = base[k] + offset[k];
      auto it = cells_.find(key(c));
      if (it != cells_.end())
        for (Index id : it->second)
          if (fn(id)) return true;
      std::size_t k = 0;
      while (k < offset.size() && offset[k] == 1) offset[k++] = -1;
      if (k == offset.size()) return false;
      ++offset[k];
    }
  }

 private:
  std::vector<long> cell_of(const Vector& p) const {
    std::vector<long> c(static_cast<std::size_t>(dim_));
    for (Index i = 0; i < dim_; ++i) c[static_cast<std::size_t>(i)] = static_cast<long>(std::floor((p[i] + 1.0) / rho_));
    return c;
  }
  static std::uint64_t key(const std::vector<long>& c) {
    std::uint64_t h = 1469598103934665603ULL;
    for (long v : c) h = mix_seed(h, static_cast<std::uint64_t>(v));
    return h;
  }

  Index dim_;
  double rho_;
  std::unordered_map<std::uint64_t, std::vector<Index>> cells_;
};

}  // namespace

double volumetric_log_bound(Index dim, double rho) { return static_cast<double>(dim) * std::log(5.0 / rho); }

SphereNet build_sphere_net(Index dim, double rho, std::size_t candidateBudget, std::uint64_t seed,
                           std::size_t coveringProbes, Exec exec, std::size_t repairRounds) {
  require(dim >= 1, "build_sphere_net: dim must be >= 1");
  require(rho > 0.0 && rho <= 2.0, "build_sphere_net: rho must lie in (0, 2]");
  require(candidateBudget >= 1, "build_sphere_net: candidateBudget must be >= 1");

  std::vector<Vector> accepted;
  const bool hashed = CellGrid::usable(dim);
  CellGrid grid(dim, rho);
  const double rho2 = rho * rho;

  auto offer = [&](const Vector& c) {
    auto too_close = [&](Index id) { return (accepted[static_cast<std::size_t>(id)] - c).squaredNorm() < rho2; };
    bool blocked = false;
    if (hashed) {
      blocked = grid.any_neighbour(c, too_close);
    } else {
      for (std::size_t j = 0; j < accepted.size() && !blocked; ++j) blocked = too_close(static_cast<Index>(j));
    }
    if (blocked) return;
    if (hashed) grid.insert(c, static_cast<Index>(accepted.size()));
    accepted.push_back(c);
  };

  for (Index i = 0; i < dim; ++i) {
    offer(Vector::Unit(dim, i));
    offer(-Vector::Unit(dim, i));
  }
  Rng rng = stream(seed, 0);
  for (std::size_t k = 0; k < candidateBudget; ++k) offer(unit_sphere_point(rng, dim));
  for (std::size_t r = 0; r < repairRounds; ++r) {
    Rng repair_rng = stream(seed, 2 + r);
    for (std::size_t k = 0; k < coveringProbes; ++k) {
      // walk away from the nearest accepted point so the probe settles in a hole
      Vector x = unit_sphere_point(repair_rng, dim);
      for (int step = 0; step < 16; ++step) {
        std::size_t nearest = 0;
        double best = INFINITY;
        for (std::size_t j = 0; j < accepted.size(); ++j) {
          const double dist = (accepted[j] - x).squaredNorm();
          if (dist < best) {
            best = dist;
            nearest = j;
          }
        }
        if (best >= rho2) break;
        x = (x + 0.5 * (x - accepted[nearest])).normalized();
      }
      offer(x);
    }
  }

  SphereNet net;
  net.dim = dim;
  net.rho = rho;
  net.points.resize(static_cast<Index>(accepted.size()), dim);
  for (std::size_t j = 0; j < accepted.size(); ++j) net.points.row(static_cast<Index>(j)) = accepted[j].transpose();
  net.separationCertified = true;

  if (std::log(static_cast<double>(net.size())) > volumetric_log_bound(dim, rho) + 1e-12)
    throw std::logic_error("build_sphere_net: net exceeds the volumetric bound");

  Rng probe_rng = stream(seed, 1);
  Matrix probes(static_cast<Index>(std::max<std::size_t>(coveringProbes, 1)), dim);
  for (Index r = 0; r < probes.rows(); ++r) probes.row(r) = unit_sphere_point(probe_rng, dim).transpose();
  net.coveringRadiusEstimate = covering_radius(net.points, probes, exec);
  net.coveringWarning = net.coveringRadiusEstimate > rho;
  return net;
}

double covering_radius(const Matrix& net, const Matrix& probes, Exec exec) {
  require(net.rows() >= 1 && net.cols() == probes.cols(), "covering_radius: shape mismatch");
  const auto nearest = map_indices<double>(exec, static_cast<std::size_t>(probes.rows()), [&](std::size_t r) {
    return (net.rowwise() - probes.row(static_cast<Index>(r))).rowwise().squaredNorm().minCoeff();
  });
  double worst = 0.0;
  for (double v : nearest) worst = std::max(worst, v);
  return std::sqrt(worst);
}

std::vector<Index> pajor_subset(const Matrix& points, double epsilon, std::size_t maxSize) {
  require(points.rows() >= 1, "pajor_subset: empty point set");
  require(epsilon >= 0.0, "pajor_subset: epsilon must be >= 0");
  std::vector<Index> chosen;
  if (maxSize == 0) return chosen;
  chosen.push_back(0);
  Vector dist = (points.rowwise() - points.row(0)).rowwise().norm();
  while (chosen.size() < maxSize) {
    Index arg = 0;
    const double far = dist.maxCoeff(&arg);  // lowest index on ties
    if (far <= 0.0 || far < epsilon) break;
    chosen.push_back(arg);
    dist = dist.cwiseMin((points.rowwise() - points.row(arg)).rowwise().norm());
  }
  return chosen;
}

}  // namespace dmlab
