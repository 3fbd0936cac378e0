#include <gtest/gtest.h>

#include "nac/error.hpp"
#include "nac/mdp.hpp"
#include "support.hpp"

using namespace nac;

TEST(Mdp, DegenerateOneStateIsValid) {
  const FiniteMdp mdp = build_bandit({0.3, 0.7}, 0.5);
  EXPECT_EQ(mdp.n_states, 1);
  EXPECT_NO_THROW(validate(mdp));
}

TEST(Mdp, RejectsNonStochasticRow) {
  FiniteMdp mdp = build_bandit({0.0, 1.0}, 0.5);
  mdp.transition(0, 0) = 0.9;
  try {
    validate(mdp);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row not stochastic"), std::string::npos);
  }
}

TEST(Mdp, RejectsDiscountOfOne) {
  FiniteMdp mdp = build_bandit({0.0, 1.0}, 0.5);
  mdp.gamma = 1.0;
  try {
    validate(mdp);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("discount out of range"), std::string::npos);
  }
}

TEST(Mdp, RejectsRewardAboveRmax) {
  FiniteMdp mdp = build_bandit({0.0, 1.0}, 0.5);
  mdp.reward(0, 1) = 2.0;
  EXPECT_THROW(validate(mdp), ValidationError);
}

TEST(Gridworld, OneByOneSelfLoops) {
  const FiniteMdp mdp = build_gridworld(1, 1, 0.9);
  ASSERT_EQ(mdp.n_states, 1);
  ASSERT_EQ(mdp.n_actions, 4);
  for (int a = 0; a < 4; ++a) EXPECT_EQ(mdp.transition(a, 0), 1.0);
}

TEST(Gridworld, TwoByTwoStructure) {
  const FiniteMdp mdp = build_gridworld(2, 2, 0.9);
  EXPECT_EQ(mdp.n_states, 4);
  EXPECT_EQ(mdp.n_actions, 4);
  for (int i = 0; i < mdp.transition.rows(); ++i) EXPECT_NEAR(mdp.transition.row(i).sum(), 1.0, 1e-12);
  EXPECT_NO_THROW(validate(mdp));
}

TEST(Gridworld, GoalRewardPlacement) {
  GridRewardSpec spec;
  spec.goal_x = 3;
  spec.goal_y = 3;
  spec.r_max = 0.7;
  const FiniteMdp mdp = build_gridworld(4, 4, 0.9, spec);
  const int goal = 3 * 4 + 3;
  for (int s = 0; s < 16; ++s) {
    for (int a = 0; a < 4; ++a) EXPECT_EQ(mdp.reward(s, a), s == goal ? 0.7 : 0.0) << s << "," << a;
  }
  EXPECT_NEAR(mdp.init_dist.sum(), 1.0, 1e-12);
  EXPECT_NEAR(mdp.init_dist.maxCoeff(), 1.0 / 16, 1e-15);
}

TEST(Gridworld, SlipSpreadsMass) {
  GridRewardSpec spec;
  spec.slip = 0.3;
  const FiniteMdp mdp = build_gridworld(3, 3, 0.9, spec);
  validate(mdp);
  // centre cell: intended move keeps 1 - slip, the other three moves get slip / 3 each
  const int centre = 4;
  for (int a = 0; a < 4; ++a) {
    const auto row = mdp.next_state_dist(centre, a);
    EXPECT_NEAR(row.maxCoeff(), 0.7, 1e-12);
    EXPECT_EQ((row.array() > 0).count(), 4);
  }
}

TEST(Gridworld, ZeroSizeRejected) { EXPECT_THROW(build_gridworld(0, 3, 0.9), ValidationError); }

TEST(RandomMdp, ValidAndDeterministic) {
  const FiniteMdp a = build_random_mdp(5, 3, 0.8, 42);
  const FiniteMdp b = build_random_mdp(5, 3, 0.8, 42);
  EXPECT_NO_THROW(validate(a));
  EXPECT_EQ(a.transition, b.transition);
  EXPECT_EQ(a.reward, b.reward);
}

TEST(Features, OneHotOneStateTwoActions) {
  const FiniteMdp mdp = build_bandit({1.0, 0.0}, 0.5);
  const FeatureMap fm = build_feature_map(mdp, FeatureKind::one_hot, 0, 0);
  ASSERT_EQ(fm.dim, 2);
  EXPECT_EQ(fm.at(0, 0)[0], 1.0);
  EXPECT_EQ(fm.at(0, 0)[1], 0.0);
  EXPECT_EQ(fm.at(0, 1)[0], 0.0);
  EXPECT_EQ(fm.at(0, 1)[1], 1.0);
}

TEST(Features, OneHotDimensionMismatch) {
  const FiniteMdp mdp = build_bandit({1.0, 0.0}, 0.5);
  EXPECT_THROW(build_feature_map(mdp, FeatureKind::one_hot, 3, 0), ValidationError);
}

TEST(Features, RandomUnitDeterministicAndUnitNorm) {
  const FiniteMdp mdp = build_gridworld(3, 2, 0.9);
  const FeatureMap a = build_feature_map(mdp, FeatureKind::random_unit, 5, 9);
  const FeatureMap b = build_feature_map(mdp, FeatureKind::random_unit, 5, 9);
  EXPECT_EQ(a.table, b.table);
  for (int i = 0; i < a.table.rows(); ++i) {
    EXPECT_LE(a.table.row(i).norm(), 1.0);
    EXPECT_NEAR(a.table.row(i).norm(), 1.0, 1e-12);
  }
  const FeatureMap c = build_feature_map(mdp, FeatureKind::random_unit, 5, 10);
  EXPECT_NE(a.table, c.table);
}

TEST(Features, GridExhaustiveNormScan) {
  const FiniteMdp mdp = build_gridworld(4, 4, 0.9);
  const FeatureMap fm = build_feature_map(mdp, FeatureKind::grid, 0, 0);
  double worst = 0.0;
  for (int s = 0; s < 16; ++s) {
    for (int a = 0; a < 4; ++a) {
      const double n = fm.at(s, a).norm();
      EXPECT_LE(n, 1.0);
      worst = std::max(worst, n);
    }
  }
  EXPECT_NEAR(worst, 1.0, 1e-15);
  EXPECT_NO_THROW(validate(fm));
}

TEST(Features, PureFunctionOfInputs) {
  for (FeatureKind kind : {FeatureKind::one_hot, FeatureKind::grid, FeatureKind::random_unit}) {
    const FiniteMdp mdp = build_gridworld(3, 3, 0.9);
    const int dim = kind == FeatureKind::random_unit ? 6 : 0;
    EXPECT_EQ(build_feature_map(mdp, kind, dim, 3).table, build_feature_map(mdp, kind, dim, 3).table);
  }
}

TEST(Features, ParseNames) {
  EXPECT_EQ(parse_feature_kind("one-hot"), FeatureKind::one_hot);
  EXPECT_EQ(parse_feature_kind("random-unit"), FeatureKind::random_unit);
  EXPECT_EQ(parse_feature_kind("grid"), FeatureKind::grid);
  EXPECT_THROW(parse_feature_kind("bogus"), ValidationError);
}

TEST(Features, ValidateRejectsLongRow) {
  const FiniteMdp mdp = build_bandit({1.0, 0.0}, 0.5);
  FeatureMap fm = build_feature_map(mdp, FeatureKind::one_hot, 0, 0);
  fm.table(0, 0) = 1.5;
  EXPECT_THROW(validate(fm), ValidationError);
}
