#include "nac/rng.hpp"

#include <cmath>

namespace nac {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(Rng& rng) {
  // 53 random mantissa bits; identical on every platform for a given engine state.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_categorical(const Eigen::Ref<const Vector>& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  const int n = static_cast<int>(probs.size());
  for (int i = 0; i < n; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // u landed in the rounding gap above the final partial sum
  for (int i = n - 1; i >= 0; --i) {
    if (probs[i] > 0.0) return i;
  }
  return n - 1;
}

Vector random_unit_vector(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

}  // namespace nac
