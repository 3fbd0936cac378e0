#include <gtest/gtest.h>

#include "nac/oracle.hpp"
#include "nac/sampler.hpp"
#include "support.hpp"

using namespace nac;
using nac::testing::total_variation;
using nac::testing::two_state_chain;

namespace {

Vector state_histogram(const VisitationSampler& sampler, int n_states, int n, Rng& rng) {
  Vector h = Vector::Zero(n_states);
  for (int k = 0; k < n; ++k) h[sampler.sample_state(rng)] += 1.0;
  return h / n;
}

}  // namespace

TEST(Sampler, SingleStateAlwaysThatState) {
  const FiniteMdp mdp = build_bandit({1.0, 0.0}, 0.7);
  const PolicyTable pi = uniform_policy(1, 2);
  Rng rng(1);
  for (auto mode : {SamplerMode::rollout(), SamplerMode::exact()}) {
    const VisitationSampler sampler(mdp, pi, mdp.init_dist, mode);
    for (int k = 0; k < 100; ++k) EXPECT_EQ(sampler.sample_state(rng), 0);
  }
}

TEST(Sampler, ChainExactVisitationIsHalfHalf) {
  const FiniteMdp mdp = two_state_chain(0.5);
  const Vector d = visitation_distribution(mdp, uniform_policy(2, 2), mdp.init_dist);
  EXPECT_NEAR(d[0], 0.5, 1e-15);
  EXPECT_NEAR(d[1], 0.5, 1e-15);
}

TEST(Sampler, ChainRolloutWithinTv) {
  const FiniteMdp mdp = two_state_chain(0.5);
  const PolicyTable pi = uniform_policy(2, 2);
  const VisitationSampler sampler(mdp, pi, mdp.init_dist, SamplerMode::rollout());
  Rng rng(2);
  Vector target(2);
  target << 0.5, 0.5;
  EXPECT_LE(total_variation(state_histogram(sampler, 2, 100000, rng), target), 0.02);
}

TEST(Sampler, ChainExactModeWithinTightTv) {
  const FiniteMdp mdp = two_state_chain(0.5);
  const PolicyTable pi = uniform_policy(2, 2);
  const VisitationSampler sampler(mdp, pi, mdp.init_dist, SamplerMode::exact());
  Rng rng(3);
  Vector target(2);
  target << 0.5, 0.5;
  EXPECT_LE(total_variation(state_histogram(sampler, 2, 100000, rng), target), 0.005);
}

TEST(Sampler, ActionFrequencies) {
  const FiniteMdp mdp = build_bandit({1.0, 0.0}, 0.5);
  Rng rng(4);
  const PolicyTable uniform = uniform_policy(1, 2);
  const VisitationSampler su(mdp, uniform, mdp.init_dist, SamplerMode::exact());
  int first = 0;
  for (int k = 0; k < 100000; ++k) first += su.sample_state_action(rng).a == 0;
  EXPECT_NEAR(first / 1e5, 0.5, 0.01);

  PolicyTable skew(1, 2);
  skew << 0.99, 0.01;
  const VisitationSampler ss(mdp, skew, mdp.init_dist, SamplerMode::exact());
  first = 0;
  for (int k = 0; k < 100000; ++k) first += ss.sample_state_action(rng).a == 0;
  EXPECT_NEAR(first / 1e5, 0.99, 0.01);
}

TEST(Sampler, JointFrequenciesOnChain) {
  const FiniteMdp mdp = two_state_chain(0.5);
  PolicyTable pi(2, 2);
  pi << 0.3, 0.7, 0.6, 0.4;
  const Vector d = visitation_distribution(mdp, pi, mdp.init_dist);
  for (auto mode : {SamplerMode::rollout(), SamplerMode::exact()}) {
    const VisitationSampler sampler(mdp, pi, mdp.init_dist, mode);
    Rng rng(5);
    Vector joint = Vector::Zero(4), target(4);
    for (int k = 0; k < 100000; ++k) {
      const auto sa = sampler.sample_state_action(rng);
      joint[sa.s * 2 + sa.a] += 1e-5;
    }
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) target[s * 2 + a] = d[s] * pi(s, a);
    }
    EXPECT_LE(total_variation(joint, target), 0.02);
  }
}

TEST(Sampler, DeterministicTransitionsAndConditionals) {
  GridRewardSpec spec;
  const FiniteMdp mdp = build_gridworld(3, 3, 0.8, spec);
  PolicyTable pi(9, 4);
  for (int s = 0; s < 9; ++s) pi.row(s) << 0.1, 0.2, 0.3, 0.4;
  const VisitationSampler sampler(mdp, pi, mdp.init_dist, SamplerMode::exact());
  const Vector d = visitation_distribution(mdp, pi, mdp.init_dist);
  Rng rng(6);
  Vector marg = Vector::Zero(9);
  Matrix cond = Matrix::Zero(9, 4);
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const Transition tr = sampler.sample_transition(rng);
    int expected = -1;
    mdp.next_state_dist(tr.s, tr.a).maxCoeff(&expected);
    EXPECT_EQ(tr.s_next, expected);
    marg[tr.s] += 1.0 / n;
    cond(tr.s_next, tr.a_next) += 1.0;
  }
  EXPECT_LE(total_variation(marg, d), 0.02);
  for (int s = 0; s < 9; ++s) {
    const double total = cond.row(s).sum();
    if (total < 2000) continue;
    EXPECT_LE(total_variation((cond.row(s) / total).transpose(), pi.row(s).transpose()), 0.02) << s;
  }
}

TEST(Sampler, RolloutBiasBoundedByHorizon) {
  // with a one-step horizon the cap state is returned with probability gamma
  const FiniteMdp mdp = two_state_chain(0.5);
  const PolicyTable pi = uniform_policy(2, 2);
  const VisitationSampler sampler(mdp, pi, mdp.init_dist, SamplerMode::rollout(1));
  Rng rng(7);
  Vector target(2);
  target << 0.5, 0.5;
  const Vector h = state_histogram(sampler, 2, 100000, rng);
  EXPECT_LE(total_variation(h, target), std::pow(0.5, 1) + 0.01);
  EXPECT_LE(std::pow(0.9, default_max_horizon(0.9)), std::exp(-10.0));
}

TEST(Sampler, SameSeedSameStream) {
  const FiniteMdp mdp = build_gridworld(3, 2, 0.9);
  const PolicyTable pi = uniform_policy(6, 4);
  const VisitationSampler sampler(mdp, pi, mdp.init_dist, SamplerMode::rollout());
  Rng a(11), b(11);
  for (int k = 0; k < 500; ++k) {
    const Transition x = sampler.sample_transition(a), y = sampler.sample_transition(b);
    EXPECT_EQ(x.s, y.s);
    EXPECT_EQ(x.a, y.a);
    EXPECT_EQ(x.s_next, y.s_next);
    EXPECT_EQ(x.a_next, y.a_next);
  }
}
