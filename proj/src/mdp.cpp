#include "nac/mdp.hpp"

#include <cmath>
#include <sstream>

#include "nac/error.hpp"
#include "nac/rng.hpp"

namespace nac {

namespace {

constexpr double kStochasticTol = 1e-12;

template <typename... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  os.precision(17);
  (os << ... << args);
  return os.str();
}

// Shrinks v by ulps until its norm is <= 1; the rescaled features land a hair
// above 1 for some dimensions.
void clamp_into_unit_ball(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> v) {
  while (v.norm() > 1.0) v *= (1.0 - 0x1.0p-52);
}

}  // namespace

void validate(const FiniteMdp& mdp) {
  if (mdp.n_states < 1 || mdp.n_actions < 1) {
    throw ValidationError(concat("empty state or action space (", mdp.n_states, " states, ",
                                 mdp.n_actions, " actions)"));
  }
  if (mdp.transition.rows() != mdp.n_pairs() || mdp.transition.cols() != mdp.n_states) {
    throw ValidationError("transition tensor has the wrong shape");
  }
  if (mdp.reward.rows() != mdp.n_states || mdp.reward.cols() != mdp.n_actions) {
    throw ValidationError("reward table has the wrong shape");
  }
  if (mdp.init_dist.size() != mdp.n_states) {
    throw ValidationError("initial distribution has the wrong length");
  }
  if (!(mdp.gamma > 0.0 && mdp.gamma < 1.0)) {
    throw ValidationError(concat("discount out of range: gamma = ", mdp.gamma));
  }
  if (!(mdp.r_max >= 0.0) || !std::isfinite(mdp.r_max)) {
    throw ValidationError(concat("r_max must be finite and nonnegative, got ", mdp.r_max));
  }
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const auto row = mdp.next_state_dist(s, a);
      if ((row.array() < 0.0).any() || !row.allFinite()) {
        throw ValidationError(concat("row not stochastic: negative entry at (s=", s, ", a=", a, ")"));
      }
      if (std::abs(row.sum() - 1.0) > kStochasticTol) {
        throw ValidationError(concat("row not stochastic: P[", s, "][", a, "] sums to ", row.sum()));
      }
      const double r = mdp.reward(s, a);
      if (!(r >= 0.0 && r <= mdp.r_max)) {
        throw ValidationError(concat("reward out of range [0, r_max]: r[", s, "][", a, "] = ", r));
      }
    }
  }
  if ((mdp.init_dist.array() < 0.0).any() || std::abs(mdp.init_dist.sum() - 1.0) > kStochasticTol) {
    throw ValidationError("initial distribution is not a probability vector");
  }
}

FiniteMdp build_gridworld(int width, int height, double gamma, const GridRewardSpec& spec) {
  if (width < 1 || height < 1) {
    throw ValidationError(concat("zero-size grid: ", width, "x", height));
  }
  if (!(spec.slip >= 0.0 && spec.slip <= 1.0)) {
    throw ValidationError(concat("slip probability out of range: ", spec.slip));
  }
  const int goal_x = spec.goal_x < 0 ? width - 1 : spec.goal_x;
  const int goal_y = spec.goal_y < 0 ? height - 1 : spec.goal_y;
  if (goal_x >= width || goal_y >= height) {
    throw ValidationError(concat("goal (", goal_x, ", ", goal_y, ") lies outside the grid"));
  }

  FiniteMdp mdp;
  mdp.n_states = width * height;
  mdp.n_actions = 4;
  mdp.gamma = gamma;
  mdp.r_max = spec.r_max;
  mdp.grid = GridShape{width, height};
  mdp.transition = Matrix::Zero(mdp.n_pairs(), mdp.n_states);
  mdp.reward = Matrix::Zero(mdp.n_states, mdp.n_actions);

  // up, down, left, right
  constexpr int kDx[4] = {0, 0, -1, 1};
  constexpr int kDy[4] = {-1, 1, 0, 0};
  auto successor = [&](int x, int y, int move) {
    const int nx = x + kDx[move];
    const int ny = y + kDy[move];
    if (nx < 0 || nx >= width || ny < 0 || ny >= height) return y * width + x;
    return ny * width + nx;
  };

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int s = y * width + x;
      for (int a = 0; a < 4; ++a) {
        for (int move = 0; move < 4; ++move) {
          const double p = move == a ? 1.0 - spec.slip : spec.slip / 3.0;
          mdp.transition(mdp.pair_index(s, a), successor(x, y, move)) += p;
        }
        if (x == goal_x && y == goal_y) mdp.reward(s, a) = spec.r_max;
      }
    }
  }
  mdp.init_dist = spec.init_dist.value_or(Vector::Constant(mdp.n_states, 1.0 / mdp.n_states));
  validate(mdp);
  return mdp;
}

FiniteMdp build_bandit(const std::vector<double>& rewards, double gamma, double r_max) {
  if (rewards.empty()) throw ValidationError("bandit needs at least one arm");
  FiniteMdp mdp;
  mdp.n_states = 1;
  mdp.n_actions = static_cast<int>(rewards.size());
  mdp.gamma = gamma;
  mdp.transition = Matrix::Ones(mdp.n_actions, 1);
  mdp.reward = Eigen::Map<const Eigen::RowVectorXd>(rewards.data(), mdp.n_actions);
  mdp.r_max = r_max >= 0.0 ? r_max : mdp.reward.maxCoeff();
  mdp.init_dist = Vector::Ones(1);
  validate(mdp);
  return mdp;
}

FiniteMdp build_random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed,
                           double r_max) {
  if (n_states < 1 || n_actions < 1) throw ValidationError("random MDP needs states and actions");
  Rng rng = make_rng(seed, 0x6d6470);
  std::exponential_distribution<double> expo(1.0);
  FiniteMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.r_max = r_max;
  mdp.transition.resize(mdp.n_pairs(), n_states);
  for (int i = 0; i < mdp.n_pairs(); ++i) {
    for (int j = 0; j < n_states; ++j) mdp.transition(i, j) = expo(rng);
    mdp.transition.row(i) /= mdp.transition.row(i).sum();
  }
  mdp.reward.resize(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) mdp.reward(s, a) = r_max * uniform01(rng);
  }
  mdp.init_dist = Vector::Constant(n_states, 1.0 / n_states);
  validate(mdp);
  return mdp;
}

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::one_hot: return "one-hot";
    case FeatureKind::random_unit: return "random-unit";
    case FeatureKind::grid: return "grid";
  }
  return "?";
}

FeatureKind parse_feature_kind(const std::string& name) {
  if (name == "one-hot") return FeatureKind::one_hot;
  if (name == "random-unit") return FeatureKind::random_unit;
  if (name == "grid") return FeatureKind::grid;
  throw ValidationError("unknown feature kind '" + name + "' (expected one-hot, random-unit, grid)");
}

int natural_feature_dim(const FiniteMdp& mdp, FeatureKind kind) {
  switch (kind) {
    case FeatureKind::one_hot: return mdp.n_pairs();
    case FeatureKind::random_unit: return 0;
    case FeatureKind::grid: return (mdp.grid ? 2 : 1) + mdp.n_actions + 1;
  }
  return 0;
}

FeatureMap build_feature_map(const FiniteMdp& mdp, FeatureKind kind, int dim, std::uint64_t seed) {
  const int natural = natural_feature_dim(mdp, kind);
  if (dim == 0) dim = natural;
  if (dim < 1) throw ValidationError("feature dimension must be >= 1");
  if (natural != 0 && dim != natural) {
    throw ValidationError(concat("dimension mismatch: ", to_string(kind), " features need dim = ",
                                 natural, ", got ", dim));
  }

  FeatureMap fm;
  fm.kind = kind;
  fm.dim = dim;
  fm.seed = seed;
  fm.n_states = mdp.n_states;
  fm.n_actions = mdp.n_actions;
  fm.table = Matrix::Zero(mdp.n_pairs(), dim);

  switch (kind) {
    case FeatureKind::one_hot:
      fm.table.setIdentity();
      break;
    case FeatureKind::random_unit: {
      Rng rng = make_rng(seed, 0x666d);
      for (int i = 0; i < mdp.n_pairs(); ++i) fm.table.row(i) = random_unit_vector(dim, rng).transpose();
      break;
    }
    case FeatureKind::grid: {
      for (int s = 0; s < mdp.n_states; ++s) {
        int col = 0;
        Eigen::RowVectorXd base = Eigen::RowVectorXd::Zero(dim);
        if (mdp.grid) {
          const int w = mdp.grid->width;
          const int h = mdp.grid->height;
          base[col++] = w > 1 ? static_cast<double>(s % w) / (w - 1) : 0.0;
          base[col++] = h > 1 ? static_cast<double>(s / w) / (h - 1) : 0.0;
        } else {
          base[col++] = mdp.n_states > 1 ? static_cast<double>(s) / (mdp.n_states - 1) : 0.0;
        }
        base[dim - 1] = 1.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
          Eigen::RowVectorXd x = base;
          x[col + a] = 1.0;
          fm.table.row(mdp.pair_index(s, a)) = x;
        }
      }
      fm.table /= fm.table.rowwise().norm().maxCoeff();
      break;
    }
  }
  for (int i = 0; i < fm.table.rows(); ++i) clamp_into_unit_ball(fm.table.row(i));
  return fm;
}

void validate(const FeatureMap& features) {
  for (int i = 0; i < features.table.rows(); ++i) {
    const double norm = features.table.row(i).norm();
    if (!(norm <= 1.0)) {
      throw ValidationError(concat("feature row ", i, " has norm ", norm, " > 1"));
    }
  }
}

}  // namespace nac
