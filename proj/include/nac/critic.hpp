#pragma once

#include <cstdint>

#include "nac/actor.hpp"
#include "nac/mdp.hpp"
#include "nac/net.hpp"
#include "nac/sampler.hpp"
#include "nac/types.hpp"

namespace nac {

struct CriticConfig {
  int width = 256;        // m'
  double radius = 1.0;    // R
  int iterations = 1000;  // T'
  double step = 0.01;     // alpha_C
};

/// alpha_C = eps^2 (1 - gamma) / (1 + 2R)^2.
double default_critic_step(double epsilon, double gamma, double radius);

/// Max-norm regularized TD state: every hidden row stays within R / sqrt(m')
/// of its initial value, and the running sum of visited iterates feeds the
/// averaged output.
class CriticState {
 public:
  CriticState(TwoLayerNet net, double radius, double step);

  /// Adds the current W(k) to the running sum, then takes one projected
  /// semi-gradient step on the TD error for `tr`.
  void td_step(const FeatureMap& features, const Transition& tr, double reg_reward, double gamma);

  const TwoLayerNet& net() const { return net_; }
  int steps() const { return steps_; }
  const Matrix& weight_sum() const { return weight_sum_; }

  /// Network carrying the averaged hidden weights (1/k) sum_{j<k} W(j).
  TwoLayerNet averaged_net() const;

 private:
  TwoLayerNet net_;
  double radius_;
  double step_;
  Matrix weight_sum_;
  int steps_ = 0;
};

/// Runs T' TD steps on i.i.d. on-policy transitions from a fresh symmetric
/// initialization and returns the weight-averaged network.
TwoLayerNet mn_ntd(const FiniteMdp& mdp, const FeatureMap& features, const PolicyTable& policy, double lambda,
                   const CriticConfig& config, const VisitationSampler& sampler, std::uint64_t seed);

/// Same, starting from a caller-supplied network (warm start or crafted init).
TwoLayerNet mn_ntd_from(TwoLayerNet init, const FiniteMdp& mdp, const FeatureMap& features,
                        const PolicyTable& policy, double lambda, const CriticConfig& config,
                        const VisitationSampler& sampler, Rng& rng);

/// q-bar(s, a) evaluated from a critic network.
StateActionFn critic_q(const TwoLayerNet& qbar, const FeatureMap& features);

/// How the entropy term is put back when turning q-bar into Q-bar.
/// `consistent`: Q-bar = q-bar + lambda log pi, the inverse of q = Q - lambda log pi,
/// so an exact q-bar gives the exact soft Q-function.
/// `literal`: Q-bar = q-bar - lambda log pi as printed in the algorithm listing.
enum class SoftQSign { consistent, literal };

SoftQSign parse_soft_q_sign(const std::string& name);
std::string to_string(SoftQSign sign);

StateActionFn soft_q_estimate(StateActionFn qbar, const PolicyTable& policy, double lambda,
                              SoftQSign sign = SoftQSign::consistent);

/// Xi-hat(s, a) = Q-bar(s, a) - sum_a' pi(a'|s) Q-bar(s, a').
StateActionFn soft_advantage_estimate(StateActionFn qbar_soft, const PolicyTable& policy);

/// Evaluates a state-action function into an n_states x n_actions table.
Matrix tabulate(const StateActionFn& fn, int n_states, int n_actions);

}  // namespace nac
