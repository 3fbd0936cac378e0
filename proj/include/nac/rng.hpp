#pragma once

#include <cstdint>
#include <random>

#include "nac/types.hpp"

namespace nac {

/// All randomness flows through this engine. Independent streams are derived
/// from a root seed with `derive_seed`, so a run is reproducible from its seed.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer over (seed, stream); distinct streams give
/// decorrelated engine seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

/// Uniform double in [0, 1).
double uniform01(Rng& rng);

/// Draws an index from a probability vector by inverse CDF.
int sample_categorical(const Eigen::Ref<const Vector>& probs, Rng& rng);

/// Uniform direction on the unit sphere in R^dim.
Vector random_unit_vector(int dim, Rng& rng);

}  // namespace nac
