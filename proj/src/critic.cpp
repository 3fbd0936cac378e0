#include "nac/critic.hpp"

#include <cmath>
#include <sstream>

#include "nac/error.hpp"

namespace nac {

double default_critic_step(double epsilon, double gamma, double radius) {
  return epsilon * epsilon * (1.0 - gamma) / ((1.0 + 2.0 * radius) * (1.0 + 2.0 * radius));
}

CriticState::CriticState(TwoLayerNet net, double radius, double step)
    : net_(std::move(net)), radius_(radius), step_(step) {
  if (!(radius_ > 0.0)) throw ValidationError("critic projection radius must be positive");
  if (!(step_ >= 0.0)) throw ValidationError("critic step size must be nonnegative");
  weight_sum_ = Matrix::Zero(net_.width(), net_.dim());
}

void CriticState::td_step(const FeatureMap& features, const Transition& tr, double reg_reward, double gamma) {
  weight_sum_ += net_.hidden();
  ++steps_;

  const auto x = features.at(tr.s, tr.a).transpose();
  const auto x_next = features.at(tr.s_next, tr.a_next).transpose();
  const Matrix& w = net_.hidden();
  const Vector pre = w * x;
  const Vector pre_next = w * x_next;
  const Vector& b = net_.out_weights();
  const double q = net_.scale() * b.dot(pre.cwiseMax(0.0));
  const double q_next = net_.scale() * b.dot(pre_next.cwiseMax(0.0));
  const double td_error = reg_reward + gamma * q_next - q;
  if (td_error == 0.0) return;

  // only rows whose unit is active at x move; project those around W(0)
  const double limit = radius_ / std::sqrt(static_cast<double>(net_.width()));
  Matrix next = w;
  const double base = step_ * td_error * net_.scale();
  for (int i = 0; i < net_.width(); ++i) {
    if (pre[i] < 0.0) continue;
    next.row(i) += (base * b[i]) * x.transpose();
    next.row(i) = project_row_around(next.row(i), net_.hidden_init().row(i), limit);
  }
  net_.set_hidden(std::move(next));
}

TwoLayerNet CriticState::averaged_net() const {
  if (steps_ == 0) return net_;
  return TwoLayerNet(net_.out_weights(), net_.hidden_init(), weight_sum_ / steps_);
}

TwoLayerNet mn_ntd_from(TwoLayerNet init, const FiniteMdp& mdp, const FeatureMap& features,
                        const PolicyTable& policy, double lambda, const CriticConfig& config,
                        const VisitationSampler& sampler, Rng& rng) {
  if (config.iterations < 1) throw ValidationError("critic iteration count T' must be >= 1");
  CriticState critic(std::move(init), config.radius, config.step);
  for (int k = 0; k < config.iterations; ++k) {
    const Transition tr = sampler.sample_transition(rng);
    double reg_reward = mdp.reward(tr.s, tr.a);
    if (lambda > 0.0) {
      const double p = policy(tr.s, tr.a);
      if (!(p > 0.0)) throw ValidationError("critic sampled an action with zero policy probability");
      reg_reward -= lambda * std::log(p);
    }
    critic.td_step(features, tr, reg_reward, mdp.gamma);
  }
  return critic.averaged_net();
}

TwoLayerNet mn_ntd(const FiniteMdp& mdp, const FeatureMap& features, const PolicyTable& policy, double lambda,
                   const CriticConfig& config, const VisitationSampler& sampler, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x7464);
  return mn_ntd_from(TwoLayerNet::sym_init(config.width, features.dim, derive_seed(seed, 0x696e6974)), mdp,
                     features, policy, lambda, config, sampler, rng);
}

StateActionFn critic_q(const TwoLayerNet& qbar, const FeatureMap& features) {
  return [net = qbar, &features](int s, int a) { return net.forward(features.at(s, a).transpose()); };
}

SoftQSign parse_soft_q_sign(const std::string& name) {
  if (name == "consistent") return SoftQSign::consistent;
  if (name == "literal") return SoftQSign::literal;
  throw ValidationError("unknown soft-Q sign convention '" + name + "' (expected consistent or literal)");
}

std::string to_string(SoftQSign sign) { return sign == SoftQSign::consistent ? "consistent" : "literal"; }

StateActionFn soft_q_estimate(StateActionFn qbar, const PolicyTable& policy, double lambda, SoftQSign sign) {
  if (lambda == 0.0) return qbar;
  const double coef = sign == SoftQSign::consistent ? lambda : -lambda;
  return [qbar = std::move(qbar), log_pi = Matrix(policy.array().log()), coef](int s, int a) {
    if (!std::isfinite(log_pi(s, a))) {
      std::ostringstream os;
      os << "zero policy entry pi(" << a << "|" << s << ") with lambda > 0";
      throw ValidationError(os.str());
    }
    return qbar(s, a) + coef * log_pi(s, a);
  };
}

StateActionFn soft_advantage_estimate(StateActionFn qbar_soft, const PolicyTable& policy) {
  return [q = std::move(qbar_soft), pi = PolicyTable(policy)](int s, int a) {
    double baseline = 0.0;
    for (int b = 0; b < pi.cols(); ++b) baseline += pi(s, b) * q(s, b);
    return q(s, a) - baseline;
  };
}

Matrix tabulate(const StateActionFn& fn, int n_states, int n_actions) {
  Matrix out(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) out(s, a) = fn(s, a);
  }
  return out;
}

}  // namespace nac
