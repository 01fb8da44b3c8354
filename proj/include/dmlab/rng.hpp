#pragma once

#include <cstdint>
#include <random>

#include "dmlab/types.hpp"

namespace dmlab {

using Rng = std::mt19937_64;

/// Mixes a master seed with a stream index (splitmix64 finalizer on both).
/// Every parallel unit of work draws from `stream(seed, index)`, so results
/// never depend on how indices are scheduled across threads.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept;

inline Rng stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix_seed(seed, index));
}

Vector gaussian_vector(Rng& rng, Index dim);
/// Uniform point on the unit sphere S^{dim-1}.
Vector unit_sphere_point(Rng& rng, Index dim);

}  // namespace dmlab
