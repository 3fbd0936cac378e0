#include "nac/oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "nac/error.hpp"

namespace nac {

namespace {

void check_policy(const FiniteMdp& mdp, const PolicyTable& policy, double lambda) {
  if (policy.rows() != mdp.n_states || policy.cols() != mdp.n_actions) {
    throw ValidationError("policy table shape does not match the MDP");
  }
  if (lambda < 0.0) throw ValidationError("lambda must be nonnegative");
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double p = policy(s, a);
      if (!(p >= 0.0) || (lambda > 0.0 && p == 0.0)) {
        std::ostringstream os;
        os << "zero policy entry pi(" << a << "|" << s << ") = " << p << " with lambda = " << lambda;
        throw ValidationError(os.str());
      }
    }
  }
}

// r - lambda log pi, with the log term dropped entirely when lambda = 0.
Matrix regularized_reward(const FiniteMdp& mdp, const PolicyTable& policy, double lambda) {
  if (lambda == 0.0) return mdp.reward;
  return mdp.reward - lambda * policy.array().log().matrix();
}

// gamma * sum_s' P(s'|s,a) v(s') reshaped to n_states x n_actions.
Matrix expected_next(const FiniteMdp& mdp, const Vector& v) {
  const Vector flat = mdp.transition * v;
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), mdp.n_states, mdp.n_actions);
}

}  // namespace

Matrix state_kernel(const FiniteMdp& mdp, const PolicyTable& policy) {
  Matrix kernel = Matrix::Zero(mdp.n_states, mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      kernel.row(s) += policy(s, a) * mdp.next_state_dist(s, a);
    }
  }
  return kernel;
}

Vector visitation_distribution(const FiniteMdp& mdp, const PolicyTable& policy, const Vector& mu) {
  const Matrix kernel = state_kernel(mdp, policy);
  const Matrix system = Matrix::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * kernel.transpose();
  Vector d = (1.0 - mdp.gamma) * system.partialPivLu().solve(mu);
  if (!d.allFinite()) throw NumericError("visitation solve produced non-finite values");
  return d;
}

ExactPolicyEval soft_policy_eval(const FiniteMdp& mdp, const PolicyTable& policy, double lambda,
                                 const Vector& mu) {
  check_policy(mdp, policy, lambda);
  if (mu.size() != mdp.n_states) throw ValidationError("mu has the wrong length");

  const Matrix reg_reward = regularized_reward(mdp, policy, lambda);
  const Vector r_pi = (policy.array() * reg_reward.array()).rowwise().sum();
  const Matrix kernel = state_kernel(mdp, policy);
  const Matrix system = Matrix::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * kernel;

  ExactPolicyEval out;
  out.lambda = lambda;
  out.v_lambda = system.partialPivLu().solve(r_pi);
  if (!out.v_lambda.allFinite()) throw NumericError("policy evaluation solve failed");

  const Matrix next = mdp.gamma * expected_next(mdp, out.v_lambda);
  out.q_soft = mdp.reward + next;
  out.q_lambda = reg_reward + next;
  out.adv = out.q_lambda.colwise() - out.v_lambda;
  const Vector baseline = (policy.array() * out.q_soft.array()).rowwise().sum();
  out.soft_adv = out.q_soft.colwise() - baseline;
  out.visitation = visitation_distribution(mdp, policy, mu);
  return out;
}

double bellman_residual(const FiniteMdp& mdp, const PolicyTable& policy, double lambda,
                        const Matrix& q) {
  const Vector v = (policy.array() * q.array()).rowwise().sum();
  const Matrix backup = regularized_reward(mdp, policy, lambda) + mdp.gamma * expected_next(mdp, v);
  return (q - backup).cwiseAbs().maxCoeff();
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& values) {
  const double top = values.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((values.array() - top).exp().sum());
}

PolicyTable softmax_rows(const Matrix& logits) {
  PolicyTable out(logits.rows(), logits.cols());
  for (int s = 0; s < logits.rows(); ++s) {
    const Eigen::RowVectorXd shifted = logits.row(s).array() - logits.row(s).maxCoeff();
    const Eigen::RowVectorXd e = shifted.array().exp();
    out.row(s) = e / e.sum();
  }
  return out;
}

PolicyTable uniform_policy(int n_states, int n_actions) {
  return PolicyTable::Constant(n_states, n_actions, 1.0 / n_actions);
}

double soft_bellman_residual(const FiniteMdp& mdp, double lambda, const Vector& v) {
  const Matrix q = mdp.reward + mdp.gamma * expected_next(mdp, v);
  double worst = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    const double backup = lambda * log_sum_exp(q.row(s) / lambda);
    worst = std::max(worst, std::abs(backup - v[s]));
  }
  return worst;
}

SoftOptimum soft_optimal(const FiniteMdp& mdp, double lambda, double tol) {
  if (!(lambda > 0.0)) throw ValidationError("soft_optimal requires lambda > 0");
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");

  const double v_max = (mdp.r_max + lambda * std::log(mdp.n_actions)) / (1.0 - mdp.gamma);
  const double stop = tol * (1.0 - mdp.gamma);
  const int cap =
      static_cast<int>(std::ceil(std::log(stop / std::max(v_max, stop)) / std::log(mdp.gamma))) + 100;

  Vector v = Vector::Zero(mdp.n_states);
  Matrix q;
  int it = 0;
  for (;;) {
    q = mdp.reward + mdp.gamma * expected_next(mdp, v);
    Vector next(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) next[s] = lambda * log_sum_exp(q.row(s) / lambda);
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    ++it;
    if (change <= stop) break;
    if (it >= cap) {
      std::ostringstream os;
      os << "soft value iteration did not converge in " << cap << " iterations (last change " << change
         << ")";
      throw NumericError(os.str());
    }
  }

  SoftOptimum out;
  out.lambda = lambda;
  out.iterations = it;
  out.q_star = mdp.reward + mdp.gamma * expected_next(mdp, v);
  out.v_star.resize(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) out.v_star[s] = lambda * log_sum_exp(out.q_star.row(s) / lambda);
  out.pi_star = softmax_rows(out.q_star / lambda);
  return out;
}

double regularized_value(const ExactPolicyEval& eval, const Vector& mu) {
  return mu.dot(eval.v_lambda);
}

double kl_potential(const PolicyTable& pi, const PolicyTable& pi_star, const Vector& d_star) {
  double total = 0.0;
  for (int s = 0; s < pi.rows(); ++s) {
    double kl = 0.0;
    for (int a = 0; a < pi.cols(); ++a) {
      const double p = pi_star(s, a);
      if (p <= 0.0) continue;
      if (pi(s, a) <= 0.0) return std::numeric_limits<double>::infinity();
      kl += p * std::log(p / pi(s, a));
    }
    total += d_star[s] * std::max(kl, 0.0);  // rounding can push an exact zero below 0
  }
  return total;
}

}  // namespace nac
