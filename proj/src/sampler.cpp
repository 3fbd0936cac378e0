#include "nac/sampler.hpp"

#include <cmath>

#include "nac/error.hpp"
#include "nac/oracle.hpp"

namespace nac {

int default_max_horizon(double gamma) {
  return static_cast<int>(std::ceil(10.0 / (1.0 - gamma)));
}

VisitationSampler::VisitationSampler(const FiniteMdp& mdp, const PolicyTable& policy, const Vector& mu,
                                     SamplerMode mode)
    : mdp_(mdp), policy_(policy), mu_(mu), mode_(mode) {
  if (policy.rows() != mdp.n_states || policy.cols() != mdp.n_actions) {
    throw ValidationError("sampler policy shape does not match the MDP");
  }
  if (mode_.kind == SamplerMode::Kind::rollout) {
    if (mode_.max_horizon == 0) mode_.max_horizon = default_max_horizon(mdp.gamma);
    if (mode_.max_horizon < 1) throw ValidationError("max_horizon must be >= 1");
  } else {
    visitation_ = visitation_distribution(mdp, policy, mu);
    // clip solver round-off so the row is a valid categorical
    visitation_ = visitation_.cwiseMax(0.0);
    visitation_ /= visitation_.sum();
  }
}

int VisitationSampler::sample_action(int s, Rng& rng) const {
  return sample_categorical(policy_.row(s).transpose(), rng);
}

int VisitationSampler::sample_next_state(int s, int a, Rng& rng) const {
  return sample_categorical(mdp_.next_state_dist(s, a).transpose(), rng);
}

int VisitationSampler::sample_state(Rng& rng) const {
  if (mode_.kind == SamplerMode::Kind::exact) return sample_categorical(visitation_, rng);
  int s = sample_categorical(mu_, rng);
  for (int step = 0; step < mode_.max_horizon; ++step) {
    if (uniform01(rng) < 1.0 - mdp_.gamma) return s;
    const int a = sample_action(s, rng);
    s = sample_next_state(s, a, rng);
  }
  return s;
}

StateAction VisitationSampler::sample_state_action(Rng& rng) const {
  const int s = sample_state(rng);
  return {s, sample_action(s, rng)};
}

Transition VisitationSampler::sample_transition(Rng& rng) const {
  const auto [s, a] = sample_state_action(rng);
  const int s_next = sample_next_state(s, a, rng);
  return {s, a, s_next, sample_action(s_next, rng)};
}

}  // namespace nac
