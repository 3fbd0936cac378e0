#pragma once

#include "nac/mdp.hpp"
#include "nac/rng.hpp"
#include "nac/types.hpp"

namespace nac {

struct SamplerMode {
  enum class Kind { rollout, exact };
  Kind kind = Kind::exact;
  int max_horizon = 0;  // rollout only; 0 selects ceil(10 / (1 - gamma))

  static SamplerMode rollout(int max_horizon = 0) { return {Kind::rollout, max_horizon}; }
  static SamplerMode exact() { return {Kind::exact, 0}; }
};

int default_max_horizon(double gamma);

struct StateAction {
  int s = 0;
  int a = 0;
};

struct Transition {
  int s = 0;
  int a = 0;
  int s_next = 0;
  int a_next = 0;
};

/// Independent draws from the discounted visitation distribution of a fixed
/// policy, plus on-policy actions and one-step transitions. Holds references
/// to the MDP and policy; both must outlive the sampler.
class VisitationSampler {
 public:
  VisitationSampler(const FiniteMdp& mdp, const PolicyTable& policy, const Vector& mu, SamplerMode mode);

  int sample_state(Rng& rng) const;
  StateAction sample_state_action(Rng& rng) const;
  Transition sample_transition(Rng& rng) const;

  int sample_action(int s, Rng& rng) const;
  int sample_next_state(int s, int a, Rng& rng) const;

  SamplerMode mode() const { return mode_; }
  const Vector& exact_visitation() const { return visitation_; }  // empty in rollout mode

 private:
  const FiniteMdp& mdp_;
  const PolicyTable& policy_;
  const Vector& mu_;
  SamplerMode mode_;
  Vector visitation_;
};

}  // namespace nac
