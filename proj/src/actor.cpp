#include "nac/actor.hpp"

#include <cmath>
#include <sstream>

#include "nac/error.hpp"

namespace nac {

void validate(const StepSchedule& schedule, double lambda) {
  if (schedule.kind == StepSchedule::Kind::constant &&
      !(schedule.eta > 0.0 && schedule.eta < 1.0 / lambda)) {
    std::ostringstream os;
    os << "constant step size eta = " << schedule.eta << " outside (0, 1/lambda) = (0, " << 1.0 / lambda
       << ")";
    throw ValidationError(os.str());
  }
}

double step_size(const StepSchedule& schedule, int t, double lambda) {
  validate(schedule, lambda);
  if (schedule.kind == StepSchedule::Kind::adaptive) return 1.0 / (lambda * (t + 1));
  return schedule.eta;
}

double kappa(const StepSchedule& schedule, int t, double lambda) {
  if (schedule.kind == StepSchedule::Kind::adaptive) return 1.0;
  return 1.0 - std::pow(1.0 - schedule.eta * lambda, t);
}

std::string to_string(const StepSchedule& schedule) {
  if (schedule.kind == StepSchedule::Kind::adaptive) return "adaptive";
  std::ostringstream os;
  os << "constant(" << schedule.eta << ")";
  return os.str();
}

Eigen::RowVectorXd policy_probs(const TwoLayerNet& net, const Eigen::Ref<const Matrix>& action_features,
                                Weights which) {
  Eigen::RowVectorXd f(action_features.rows());
  for (int a = 0; a < action_features.rows(); ++a) f[a] = net.forward(action_features.row(a).transpose(), which);
  f.array() -= f.maxCoeff();
  f = f.array().exp();
  return f / f.sum();
}

Matrix logits_table(const TwoLayerNet& net, const FeatureMap& features, Weights which) {
  // one batched product instead of n_pairs forwards
  const Matrix pre = features.table * net.weights(which).transpose();
  const Vector f = net.scale() * (pre.cwiseMax(0.0) * net.out_weights());
  Matrix out(features.n_states, features.n_actions);
  for (int s = 0; s < features.n_states; ++s) {
    for (int a = 0; a < features.n_actions; ++a) out(s, a) = f[s * features.n_actions + a];
  }
  return out;
}

PolicyTable policy_table(const TwoLayerNet& net, const FeatureMap& features) {
  const Matrix logits = logits_table(net, features);
  PolicyTable out(logits.rows(), logits.cols());
  for (int s = 0; s < logits.rows(); ++s) {
    Eigen::RowVectorXd row = logits.row(s).array() - logits.row(s).maxCoeff();
    row = row.array().exp();
    out.row(s) = row / row.sum();
  }
  return out;
}

Matrix grad_log_policy(const TwoLayerNet& net, const FeatureMap& features, int s, int a) {
  const auto xs = features.actions_at(s);
  const Eigen::RowVectorXd pi = policy_probs(net, xs);
  Matrix mean = Matrix::Zero(net.width(), net.dim());
  for (int b = 0; b < features.n_actions; ++b) mean += pi[b] * net.grad_hidden(xs.row(b).transpose());
  return net.grad_hidden(xs.row(a).transpose()) - mean;
}

ScoreCache::ScoreCache(const TwoLayerNet& net, const FeatureMap& features)
    : net_(net), features_(features), scores_(features.n_states) {}

const Matrix& ScoreCache::score(int s, int a) {
  auto& slot = scores_[s];
  if (slot.empty()) {
    const auto xs = features_.actions_at(s);
    const Eigen::RowVectorXd pi = policy_probs(net_, xs);
    slot.reserve(features_.n_actions);
    Matrix mean = Matrix::Zero(net_.width(), net_.dim());
    for (int b = 0; b < features_.n_actions; ++b) {
      slot.push_back(net_.grad_hidden(xs.row(b).transpose()));
      mean += pi[b] * slot.back();
    }
    for (auto& g : slot) g -= mean;
  }
  return slot[a];
}

double q_max(double radius, double r_max, double gamma, double lambda, int n_actions) {
  return 4.0 * (radius + r_max / (1.0 - gamma) + lambda * std::log(n_actions) / (1.0 - gamma));
}

double default_inner_step(double radius, double q_max_value, int inner_iters) {
  return radius / std::sqrt(q_max_value * inner_iters);
}

Matrix sgd_inner_loop(const ActorState& actor, const FeatureMap& features, const StateActionFn& xi_hat,
                      const VisitationSampler& sampler, Rng& rng) {
  if (actor.inner_iters < 1) throw ValidationError("inner iteration count N must be >= 1");
  const int m = actor.net.width();
  const int d = actor.net.dim();
  ScoreCache scores(actor.net, features);
  Matrix u = Matrix::Zero(m, d);
  Matrix sum = Matrix::Zero(m, d);
  for (int n = 0; n < actor.inner_iters; ++n) {
    const auto [s, a] = sampler.sample_state_action(rng);
    const Matrix& g = scores.score(s, a);
    const double residual = (g.array() * u.array()).sum() - xi_hat(s, a);
    u = project_rows_ball(u - actor.inner_step * residual * g, actor.radius);
    sum += u;
  }
  // the average of in-ball iterates is in the ball; re-projecting only absorbs round-off
  return project_rows_ball(sum / actor.inner_iters, actor.radius);
}

Matrix nac_update(ActorState& actor, const Matrix& u) {
  const double eta = step_size(actor.schedule, actor.t, actor.lambda);
  const Matrix deviation = actor.net.hidden() - actor.net.hidden_init();
  Matrix w = u - actor.lambda * deviation;
  const Matrix next = (1.0 - eta * actor.lambda) * deviation + eta * u;
  actor.net.set_hidden(actor.net.hidden_init() + next);
  ++actor.t;
  return w;
}

}  // namespace nac
