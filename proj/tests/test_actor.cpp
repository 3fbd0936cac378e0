#include <gtest/gtest.h>

#include <random>

#include "nac/actor.hpp"
#include "nac/error.hpp"
#include "nac/oracle.hpp"
#include "nac/schedule.hpp"

using namespace nac;

namespace {

TwoLayerNet perturbed(int m, int d, std::uint64_t seed, double scale) {
  TwoLayerNet net = TwoLayerNet::sym_init(m, d, seed);
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix theta = net.hidden();
  for (int i = 0; i < theta.size(); ++i) theta.data()[i] += normal(rng);
  net.set_hidden(theta);
  return net;
}

struct Fixture {
  FiniteMdp mdp = build_gridworld(3, 2, 0.9);
  FeatureMap fm = build_feature_map(mdp, FeatureKind::grid, 0, 0);
};

}  // namespace

TEST(PolicyProbs, UniformAtInit) {
  Fixture f;
  const TwoLayerNet net = TwoLayerNet::sym_init(16, f.fm.dim, 1);
  const PolicyTable pi = policy_table(net, f.fm);
  EXPECT_LE((pi.array() - 0.25).abs().maxCoeff(), 1e-15);
}

TEST(PolicyProbs, TwoLogitSoftmax) {
  const double p = std::exp(1.0) / (1.0 + std::exp(1.0));
  Matrix logits(1, 2);
  logits << 1.0, 0.0;
  const PolicyTable pi = softmax_rows(logits);
  EXPECT_NEAR(pi(0, 0), p, 1e-15);
  EXPECT_NEAR(pi(0, 0), 0.7311, 5e-5);
  EXPECT_NEAR(pi(0, 1), 0.2689, 5e-5);

  // the same numbers through a network: c = (1, -1), theta = (sqrt2 e1, 0), x_a1 = e1, x_a2 = 0
  Vector c(2);
  c << 1.0, -1.0;
  Matrix theta = Matrix::Zero(2, 2);
  theta(0, 0) = std::sqrt(2.0);
  const TwoLayerNet net(c, theta, theta);
  Matrix xs = Matrix::Zero(2, 2);
  xs(0, 0) = 1.0;
  const Eigen::RowVectorXd row = policy_probs(net, xs);
  EXPECT_NEAR(row[0], p, 1e-14);
  EXPECT_NEAR(row.sum(), 1.0, 1e-12);
}

TEST(PolicyProbs, StrictlyPositiveRowsSumToOne) {
  Fixture f;
  const TwoLayerNet net = perturbed(32, f.fm.dim, 4, 3.0);
  const PolicyTable pi = policy_table(net, f.fm);
  EXPECT_GT(pi.minCoeff(), 0.0);
  for (int s = 0; s < pi.rows(); ++s) EXPECT_NEAR(pi.row(s).sum(), 1.0, 1e-12);
}

TEST(GradLogPolicy, ScoreIdentityAndTwoActionForm) {
  Fixture f;
  const TwoLayerNet net = perturbed(16, f.fm.dim, 5, 0.5);
  const PolicyTable pi = policy_table(net, f.fm);
  for (int s = 0; s < f.mdp.n_states; ++s) {
    Matrix acc = Matrix::Zero(16, f.fm.dim);
    for (int a = 0; a < 4; ++a) {
      const Matrix g = grad_log_policy(net, f.fm, s, a);
      EXPECT_LE(g.norm(), 2.0);
      acc += pi(s, a) * g;
    }
    EXPECT_LE(acc.cwiseAbs().maxCoeff(), 1e-12);
  }

  const FiniteMdp bandit = build_bandit({1.0, 0.0}, 0.5);
  const FeatureMap fm = build_feature_map(bandit, FeatureKind::one_hot, 0, 0);
  const TwoLayerNet sym = TwoLayerNet::sym_init(8, 2, 3);
  const Matrix g1 = sym.grad_hidden(fm.at(0, 0).transpose());
  const Matrix g2 = sym.grad_hidden(fm.at(0, 1).transpose());
  EXPECT_LE((grad_log_policy(sym, fm, 0, 0) - 0.5 * (g1 - g2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GradLogPolicy, CacheMatchesDirect) {
  Fixture f;
  const TwoLayerNet net = perturbed(16, f.fm.dim, 6, 0.5);
  ScoreCache cache(net, f.fm);
  for (int s = 0; s < f.mdp.n_states; ++s) {
    for (int a = 0; a < 4; ++a) EXPECT_LE((cache.score(s, a) - grad_log_policy(net, f.fm, s, a)).norm(), 1e-14);
  }
}

TEST(Schedule, StepSizes) {
  EXPECT_NEAR(step_size(StepSchedule::adaptive(), 0, 0.1), 10.0, 1e-12);
  EXPECT_NEAR(step_size(StepSchedule::adaptive(), 9, 0.1), 1.0, 1e-12);
  for (int t : {0, 1, 7}) EXPECT_EQ(step_size(StepSchedule::constant(0.5), t, 1.0), 0.5);
  EXPECT_THROW(validate(StepSchedule::constant(1.0), 1.0), ValidationError);
  EXPECT_THROW(validate(StepSchedule::constant(0.0), 1.0), ValidationError);
  EXPECT_NO_THROW(validate(StepSchedule::constant(0.99), 1.0));
}

TEST(Schedule, Kappa) {
  for (int t : {0, 3, 100}) EXPECT_EQ(kappa(StepSchedule::adaptive(), t, 0.3), 1.0);
  EXPECT_NEAR(kappa(StepSchedule::constant(0.5), 2, 1.0), 0.75, 1e-15);
  EXPECT_EQ(kappa(StepSchedule::constant(0.5), 0, 1.0), 0.0);
}

TEST(InnerLoop, QmaxAndDefaultStep) {
  const double qm = q_max(1.0, 1.0, 0.9, 0.1, 2);
  EXPECT_NEAR(qm, 4.0 * (1.0 + 10.0 + 0.1 * std::log(2.0) / 0.1), 1e-12);
  EXPECT_NEAR(qm, 46.77, 5e-3);
  EXPECT_NEAR(default_inner_step(1.0, qm, 100), 1.0 / std::sqrt(qm * 100), 1e-15);
}

TEST(InnerLoop, ZeroTargetGivesZero) {
  Fixture f;
  ActorState actor{perturbed(16, f.fm.dim, 7, 0.2), 0.1, 1.0, StepSchedule::adaptive(), 0, 50, 0.5};
  const PolicyTable pi = policy_table(actor.net, f.fm);
  const VisitationSampler sampler(f.mdp, pi, f.mdp.init_dist, SamplerMode::exact());
  Rng rng(1);
  const Matrix u = sgd_inner_loop(actor, f.fm, [](int, int) { return 0.0; }, sampler, rng);
  EXPECT_EQ(u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(InnerLoop, SingleStepHandComputation) {
  Fixture f;
  for (double step : {0.01, 50.0}) {  // inside the ball, and clipped by the projection
    ActorState actor{perturbed(16, f.fm.dim, 8, 0.2), 0.1, 1.0, StepSchedule::adaptive(), 0, 1, step};
    const PolicyTable pi = policy_table(actor.net, f.fm);
    const VisitationSampler sampler(f.mdp, pi, f.mdp.init_dist, SamplerMode::exact());
    auto xi = [](int s, int a) { return 0.1 * (s + 1) - 0.05 * a; };
    Rng rng(42), replay(42);
    const Matrix u = sgd_inner_loop(actor, f.fm, xi, sampler, rng);
    const StateAction sa = sampler.sample_state_action(replay);
    const Matrix raw = step * xi(sa.s, sa.a) * grad_log_policy(actor.net, f.fm, sa.s, sa.a);
    Matrix expected = raw;
    const double limit = 1.0 / 4.0;
    for (int i = 0; i < raw.rows(); ++i) {
      const double n = raw.row(i).norm();
      if (n > limit) expected.row(i) *= limit / n;
    }
    EXPECT_LE((u - expected).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE(max_row_norm(u), limit * (1 + 1e-14));
  }
}

TEST(InnerLoop, RowsStayInBall) {
  Fixture f;
  ActorState actor{perturbed(32, f.fm.dim, 9, 0.2), 0.1, 0.5, StepSchedule::adaptive(), 0, 300, 5.0};
  const PolicyTable pi = policy_table(actor.net, f.fm);
  const VisitationSampler sampler(f.mdp, pi, f.mdp.init_dist, SamplerMode::exact());
  Rng rng(2);
  const Matrix u = sgd_inner_loop(actor, f.fm, [](int s, int a) { return 3.0 * (s - a); }, sampler, rng);
  EXPECT_LE(max_row_norm(u), 0.5 / std::sqrt(32.0) * (1 + 1e-14));
}

TEST(NacUpdate, FixedPoint) {
  ActorState actor{TwoLayerNet::sym_init(8, 3, 1), 0.5, 1.0, StepSchedule::adaptive(), 0, 1, 0.1};
  const Matrix before = actor.net.hidden();
  nac_update(actor, Matrix::Zero(8, 3));
  EXPECT_EQ(actor.net.hidden(), before);
  EXPECT_EQ(actor.t, 1);
}

TEST(NacUpdate, AdaptiveAveragingRecursion) {
  const double lambda = 0.4;
  ActorState actor{TwoLayerNet::sym_init(8, 3, 2), lambda, 1.0, StepSchedule::adaptive(), 0, 1, 0.1};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-0.1, 0.1);
  Matrix sum = Matrix::Zero(8, 3);
  for (int t = 0; t < 3; ++t) {
    Matrix u(8, 3);
    for (int i = 0; i < u.size(); ++i) u.data()[i] = unif(rng);
    sum += u;
    nac_update(actor, u);
    const Matrix expected = sum / (lambda * (t + 1));
    EXPECT_LE(((actor.net.hidden() - actor.net.hidden_init()) - expected).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(NacUpdate, PersistenceUnderBothSchedules) {
  const int m = 16;
  const double radius = 1.0, lambda = 0.5;
  for (StepSchedule schedule : {StepSchedule::adaptive(), StepSchedule::constant(1.5)}) {
    ActorState actor{TwoLayerNet::sym_init(m, 3, 4), lambda, radius, schedule, 0, 1, 0.1};
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int t = 0; t < 40; ++t) {
      Matrix u(m, 3);
      for (int i = 0; i < u.size(); ++i) u.data()[i] = normal(rng);
      u = project_rows_ball(u, radius);
      const Matrix w = nac_update(actor, u);
      const double bound = radius * kappa(schedule, actor.t, lambda) / (lambda * std::sqrt(double(m)));
      EXPECT_LE(actor.net.max_row_deviation(), bound + 1e-12) << t;
      EXPECT_LE(max_row_norm(w), 2.0 * radius / std::sqrt(double(m)) + 1e-12);
    }
  }
}
