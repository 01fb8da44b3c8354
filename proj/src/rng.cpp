#include "dmlab/rng.hpp"

namespace dmlab {

namespace {
std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

Vector gaussian_vector(Rng& rng, Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector g(dim);
  for (Index i = 0; i < dim; ++i) g[i] = normal(rng);
  return g;
}

Vector unit_sphere_point(Rng& rng, Index dim) {
  for (;;) {
    Vector g = gaussian_vector(rng, dim);
    const double norm = g.norm();
    if (norm > 1e-300) return g / norm;
  }
}

}  // namespace dmlab
