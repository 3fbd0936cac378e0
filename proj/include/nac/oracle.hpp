#pragma once

#include "nac/mdp.hpp"
#include "nac/types.hpp"

namespace nac {

/// Exact regularized evaluation of one fixed policy.
struct ExactPolicyEval {
  Matrix q_lambda;   // soft q: expected discounted r - lambda log pi, first action fixed
  Vector v_lambda;   // V(s) = sum_a pi(a|s) q(s, a)
  Matrix q_soft;     // Q(s, a) = r + gamma E V(s') = q + lambda log pi
  Matrix adv;        // A = q - V
  Matrix soft_adv;   // Xi = Q - sum_a' pi(a'|s) Q(s, a')
  Vector visitation; // d_mu^pi
  double lambda = 0.0;
};

/// Solves (I - gamma P_pi) V = r_pi - lambda H_pi on the state space with a
/// pivoted LU factorization and derives every other table from V. lambda = 0
/// drops the log-policy term; lambda > 0 requires a strictly positive policy.
ExactPolicyEval soft_policy_eval(const FiniteMdp& mdp, const PolicyTable& policy, double lambda,
                                 const Vector& mu);

/// Discounted visitation (1 - gamma) mu^T (I - gamma P_pi)^{-1}.
Vector visitation_distribution(const FiniteMdp& mdp, const PolicyTable& policy, const Vector& mu);

/// State-to-state kernel under the policy.
Matrix state_kernel(const FiniteMdp& mdp, const PolicyTable& policy);

/// sup-norm of q - T^pi q.
double bellman_residual(const FiniteMdp& mdp, const PolicyTable& policy, double lambda,
                        const Matrix& q);

struct SoftOptimum {
  Matrix q_star;
  Vector v_star;
  PolicyTable pi_star;
  double lambda = 0.0;
  int iterations = 0;
};

/// Soft value iteration: V <- lambda logsumexp_a((r + gamma P V) / lambda),
/// stopped once the sup-norm change drops below tol (1 - gamma).
SoftOptimum soft_optimal(const FiniteMdp& mdp, double lambda, double tol = 1e-9);

/// Sup-norm residual of the soft Bellman optimality equation at v.
double soft_bellman_residual(const FiniteMdp& mdp, double lambda, const Vector& v);

/// V_lambda^pi(mu).
double regularized_value(const ExactPolicyEval& eval, const Vector& mu);

/// Psi(pi) = sum_s d*(s) KL(pi*(.|s) || pi(.|s)). Returns +inf when pi
/// vanishes where pi* does not.
double kl_potential(const PolicyTable& pi, const PolicyTable& pi_star, const Vector& d_star);

/// Numerically stable log sum exp.
double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& values);

/// Row-wise softmax with max subtraction.
PolicyTable softmax_rows(const Matrix& logits);

PolicyTable uniform_policy(int n_states, int n_actions);

}  // namespace nac
