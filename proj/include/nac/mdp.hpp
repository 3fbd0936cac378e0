#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nac/types.hpp"

namespace nac {

struct GridShape {
  int width = 0;
  int height = 0;
};

/// Finite discounted MDP with dense storage. Transition rows are indexed by
/// the flattened pair s * n_actions + a.
struct FiniteMdp {
  int n_states = 0;
  int n_actions = 0;
  Matrix transition;  // (n_states * n_actions) x n_states
  Matrix reward;      // n_states x n_actions
  double r_max = 1.0;
  double gamma = 0.9;
  Vector init_dist;   // mu
  std::optional<GridShape> grid;

  int pair_index(int s, int a) const { return s * n_actions + a; }
  int n_pairs() const { return n_states * n_actions; }
  auto next_state_dist(int s, int a) const { return transition.row(pair_index(s, a)); }
};

/// Throws ValidationError naming the first violated invariant.
void validate(const FiniteMdp& mdp);

/// Gridworld reward layout and dynamics knobs.
struct GridRewardSpec {
  int goal_x = -1;  // -1 selects the last column
  int goal_y = -1;  // -1 selects the last row
  double r_max = 1.0;
  double slip = 0.0;  // probability mass spread uniformly over the other moves
  std::optional<Vector> init_dist;
};

/// 4-move gridworld (up, down, left, right). Moving into a wall leaves the
/// agent in place. Every action at the goal cell earns r_max.
FiniteMdp build_gridworld(int width, int height, double gamma, const GridRewardSpec& spec = {});

/// Single-state bandit: all actions self-loop.
FiniteMdp build_bandit(const std::vector<double>& rewards, double gamma, double r_max = -1.0);

/// Random MDP with Dirichlet(1) transition rows, uniform rewards in [0, r_max]
/// and a uniform initial distribution.
FiniteMdp build_random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed,
                           double r_max = 1.0);

enum class FeatureKind { one_hot, random_unit, grid };

std::string to_string(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& name);

/// Embedding of state-action pairs into the closed unit ball of R^dim.
struct FeatureMap {
  FeatureKind kind = FeatureKind::grid;
  int dim = 0;
  std::uint64_t seed = 0;
  int n_states = 0;
  int n_actions = 0;
  Matrix table;  // n_pairs x dim

  auto at(int s, int a) const { return table.row(s * n_actions + a); }
  /// Feature rows of every action at state s, shape n_actions x dim.
  auto actions_at(int s) const { return table.middleRows(s * n_actions, n_actions); }
};

/// Feature dimension implied by `kind` for this MDP, or 0 when the kind
/// accepts any dimension.
int natural_feature_dim(const FiniteMdp& mdp, FeatureKind kind);

/// dim == 0 selects the natural dimension. For the grid kind the features
/// are (x, y, one-hot action, 1) with x, y in [0, 1], rescaled so the largest
/// norm over S x A is exactly 1. Non-grid MDPs use the normalized state index
/// as the single coordinate.
FeatureMap build_feature_map(const FiniteMdp& mdp, FeatureKind kind, int dim, std::uint64_t seed);

/// Throws ValidationError if any row has norm above 1.
void validate(const FeatureMap& features);

}  // namespace nac
