#pragma once

// Independent reference computations used by the tests. These deliberately
// avoid the library's solvers: iteration instead of factorization, series
// instead of inverses.

#include <cmath>
#include <random>

#include "nac/mdp.hpp"
#include "nac/types.hpp"

namespace nac::testing {

// Iterates q <- r - lambda log pi + gamma P (pi . q) on the pair space.
inline Matrix iterate_q(const FiniteMdp& mdp, const PolicyTable& pi, double lambda, int sweeps = 0) {
  if (sweeps == 0) sweeps = static_cast<int>(std::ceil(std::log(1e-15) / std::log(mdp.gamma))) + 50;
  Matrix q = Matrix::Zero(mdp.n_states, mdp.n_actions);
  for (int it = 0; it < sweeps; ++it) {
    Vector v(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) v[s] = pi.row(s).dot(q.row(s));
    Matrix next(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        const double ent = lambda > 0.0 ? lambda * std::log(pi(s, a)) : 0.0;
        next(s, a) = mdp.reward(s, a) - ent + mdp.gamma * mdp.next_state_dist(s, a).dot(v.transpose());
      }
    }
    q = next;
  }
  return q;
}

// (1 - gamma) sum_k gamma^k mu P^k, truncated once gamma^k < 1e-16.
inline Vector series_visitation(const FiniteMdp& mdp, const PolicyTable& pi, const Vector& mu) {
  Matrix p = Matrix::Zero(mdp.n_states, mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) p.row(s) += pi(s, a) * mdp.next_state_dist(s, a);
  }
  Eigen::RowVectorXd term = mu.transpose();
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(mdp.n_states);
  double g = 1.0;
  while (g > 1e-17) {
    acc += g * term;
    term = term * p;
    g *= mdp.gamma;
  }
  return (1.0 - mdp.gamma) * acc.transpose();
}

// s0 -> s1 -> s1 under every action, mu = delta_{s0}.
inline FiniteMdp two_state_chain(double gamma, int n_actions = 2) {
  FiniteMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = n_actions;
  mdp.transition = Matrix::Zero(2 * n_actions, 2);
  for (int a = 0; a < n_actions; ++a) {
    mdp.transition(a, 1) = 1.0;
    mdp.transition(n_actions + a, 1) = 1.0;
  }
  mdp.reward = Matrix::Zero(2, n_actions);
  mdp.reward(1, 0) = 1.0;
  mdp.r_max = 1.0;
  mdp.gamma = gamma;
  mdp.init_dist = Vector::Zero(2);
  mdp.init_dist[0] = 1.0;
  return mdp;
}

inline double total_variation(const Vector& p, const Vector& q) { return 0.5 * (p - q).cwiseAbs().sum(); }

// Random strictly positive policy with rows drawn from normalized exp(N(0, scale^2)).
template <class Rng>
PolicyTable random_policy(int n_states, int n_actions, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  PolicyTable pi(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) pi(s, a) = std::exp(normal(rng));
    pi.row(s) /= pi.row(s).sum();
  }
  return pi;
}

}  // namespace nac::testing
