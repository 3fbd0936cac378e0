#pragma once

#include <functional>
#include <vector>

#include "nac/mdp.hpp"
#include "nac/net.hpp"
#include "nac/rng.hpp"
#include "nac/sampler.hpp"
#include "nac/schedule.hpp"
#include "nac/types.hpp"

namespace nac {

using StateActionFn = std::function<double(int s, int a)>;

struct ActorState {
  TwoLayerNet net;
  double lambda = 0.1;
  double radius = 1.0;
  StepSchedule schedule;
  int t = 0;
  int inner_iters = 1;   // N
  double inner_step = 0.0;  // alpha_A
};

/// Softmax of the network outputs over the per-action feature rows of one state.
Eigen::RowVectorXd policy_probs(const TwoLayerNet& net, const Eigen::Ref<const Matrix>& action_features,
                                Weights which = Weights::current);

/// Network outputs f(s, a) for all pairs, shape n_states x n_actions.
Matrix logits_table(const TwoLayerNet& net, const FeatureMap& features, Weights which = Weights::current);

PolicyTable policy_table(const TwoLayerNet& net, const FeatureMap& features);

/// Score function grad log pi(a|s) = grad f(s, a) - sum_a' pi(a'|s) grad f(s, a').
Matrix grad_log_policy(const TwoLayerNet& net, const FeatureMap& features, int s, int a);

/// Scores of every action at every state, computed on first use per state.
class ScoreCache {
 public:
  ScoreCache(const TwoLayerNet& net, const FeatureMap& features);
  const Matrix& score(int s, int a);

 private:
  const TwoLayerNet& net_;
  const FeatureMap& features_;
  std::vector<std::vector<Matrix>> scores_;
};

/// Upper bound on the inner-loop gradient norm,
/// 4 (R + r_max / (1 - gamma) + lambda log|A| / (1 - gamma)).
double q_max(double radius, double r_max, double gamma, double lambda, int n_actions);

/// alpha_A = R / sqrt(q_max N).
double default_inner_step(double radius, double q_max_value, int inner_iters);

/// Projected SGD on the compatible least-squares objective, started at 0.
/// Returns the average of the N projected iterates u_1..u_N.
Matrix sgd_inner_loop(const ActorState& actor, const FeatureMap& features, const StateActionFn& xi_hat,
                      const VisitationSampler& sampler, Rng& rng);

/// theta <- theta + eta_t u - eta_t lambda (theta - theta(0)); increments t.
/// Returns w_t = u - lambda (theta(t) - theta(0)).
Matrix nac_update(ActorState& actor, const Matrix& u);

}  // namespace nac
