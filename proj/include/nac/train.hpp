#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "nac/actor.hpp"
#include "nac/config.hpp"
#include "nac/diagnostics.hpp"
#include "nac/mdp.hpp"
#include "nac/net.hpp"

namespace nac {

/// Result of one training run: the final actor, one row per iterate
/// t = 0..T and the deterministic-invariant margins observed along the way.
struct NacRunState {
  ActorState actor;
  std::uint64_t seed = 0;
  std::vector<DriftRow> rows;
  std::vector<double> wallclock_ms;
  PersistenceReport persistence;
  double w_row_margin_min = std::numeric_limits<double>::infinity();  // 2R/sqrt(m) - max row of w_t
  double score_identity_max = 0.0;   // max |sum_a pi grad log pi| entry over logged iterates
  double pdl_residual_max = 0.0;     // (pi_t, pi*) identity residual, every 10th iterate
  double delta0 = std::numeric_limits<double>::quiet_NaN();
};

/// What an observer sees between the critic/inner-loop phase and the update
/// of iteration t. `critic` and `u` are null at the final iterate t = T.
struct IterationView {
  int t = 0;
  const ActorState& actor;
  const PolicyTable& policy;
  const TwoLayerNet* critic = nullptr;
  const Matrix* u = nullptr;
  const DriftRow& row;
};

using IterationObserver = std::function<void(const IterationView&)>;

/// Runs T outer iterations of critic fit, projected inner SGD and the
/// averaged natural-gradient update. Deterministic invariants (parameter
/// drift bound, w_t row bound, softmax floor, nonnegative Delta and Psi)
/// are checked every iteration and raise InvariantViolation with t.
NacRunState train(const ExperimentConfig& config, const FiniteMdp& mdp, const FeatureMap& features,
                  std::uint64_t seed, const IterationObserver& observer = {});

}  // namespace nac
