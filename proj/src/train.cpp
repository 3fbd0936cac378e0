#include "nac/train.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "nac/critic.hpp"
#include "nac/error.hpp"
#include "nac/oracle.hpp"
#include "nac/sampler.hpp"

namespace nac {

namespace {

constexpr double kArithmeticSlack = 1e-12;

[[noreturn]] void violation(int t, const std::string& what) {
  std::ostringstream os;
  os << "iteration " << t << ": " << what;
  throw InvariantViolation(os.str());
}

double score_identity_error(const TwoLayerNet& net, const FeatureMap& features, const PolicyTable& pi) {
  ScoreCache scores(net, features);
  double worst = 0.0;
  for (int s = 0; s < features.n_states; ++s) {
    Matrix acc = Matrix::Zero(net.width(), net.dim());
    for (int a = 0; a < features.n_actions; ++a) acc += pi(s, a) * scores.score(s, a);
    worst = std::max(worst, acc.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

NacRunState train(const ExperimentConfig& config, const FiniteMdp& mdp, const FeatureMap& features,
                  std::uint64_t seed, const IterationObserver& observer) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();

  NacRunState run;
  run.seed = seed;
  ActorState& actor = run.actor;
  actor.net = TwoLayerNet::sym_init(config.actor_width, features.dim, derive_seed(seed, 1));
  actor.lambda = config.lambda;
  actor.radius = config.radius;
  actor.schedule = config.schedule;
  actor.inner_iters = config.inner_iterations;
  actor.inner_step = effective_actor_step(config, mdp);

  const CriticConfig critic_cfg{config.critic_width, effective_critic_radius(config), config.critic_iterations,
                                effective_critic_step(config, mdp)};
  const Vector& mu = mdp.init_dist;
  const int m = config.actor_width;
  const double w_bound = 2.0 * config.radius / std::sqrt(static_cast<double>(m));

  std::optional<SoftOptimum> optimum;
  Vector d_star;
  double v_star = 0.0;
  if (config.exact_diagnostics) {
    optimum = soft_optimal(mdp, config.lambda);
    d_star = visitation_distribution(mdp, optimum->pi_star, mu);
    v_star = mu.dot(optimum->v_star);
  }

  Rng actor_rng = make_rng(seed, 2);
  Rng critic_rng = make_rng(seed, 3);
  std::optional<TwoLayerNet> warm_critic;

  for (int t = 0;; ++t) {
    const PolicyTable pi = policy_table(actor.net, features);
    DriftRow row;
    row.t = t;

    const Matrix logits = logits_table(actor.net, features);
    row.sup_f = logits.cwiseAbs().maxCoeff();
    row.pi_min_emp = pi.minCoeff();
    const double floor = std::exp(-2.0 * row.sup_f) / mdp.n_actions;
    if (!(row.pi_min_emp >= floor * (1.0 - 1e-12))) violation(t, "policy fell below the softmax floor");

    row.max_param_dev = actor.net.max_row_deviation();
    const double bound = persistence_bound(config.radius, config.lambda, m, config.schedule, t);
    run.persistence.min_margin = std::min(run.persistence.min_margin, bound - row.max_param_dev);
    if (bound - row.max_param_dev == run.persistence.min_margin) run.persistence.tightest_t = t;
    if (!(row.max_param_dev <= bound + kArithmeticSlack)) {
      std::ostringstream os;
      os.precision(17);
      os << "parameter drift " << row.max_param_dev << " exceeds R kappa_t/(lambda sqrt m) = " << bound;
      violation(t, os.str());
    }
    run.score_identity_max = std::max(run.score_identity_max, score_identity_error(actor.net, features, pi));

    std::optional<ExactPolicyEval> eval;
    if (config.exact_diagnostics) {
      eval = soft_policy_eval(mdp, pi, config.lambda, mu);
      row.v_lambda = regularized_value(*eval, mu);
      row.delta = v_star - row.v_lambda;
      row.psi = kl_potential(pi, optimum->pi_star, d_star);
      row.log_linear_gap = log_linear_gap(actor.net, features);
      row.mismatch_c = mismatch_coefficient(d_star, eval->visitation);
      row.mismatch_c_tilde = mismatch_coefficient_pairs(d_star, optimum->pi_star, eval->visitation, pi);
      if (!(row.delta >= -1e-8)) violation(t, "suboptimality gap Delta_t is negative");
      if (!(row.psi >= 0.0)) violation(t, "KL potential is negative");
      if (t == 0) run.delta0 = row.delta;
      if (t % 10 == 0) {
        run.pdl_residual_max = std::max(
            run.pdl_residual_max, performance_difference_residual(mdp, pi, optimum->pi_star, config.lambda, mu));
      }
    }

    if (t == config.iterations) {
      run.wallclock_ms.push_back(
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
      run.rows.push_back(row);
      if (observer) observer(IterationView{t, actor, pi, nullptr, nullptr, run.rows.back()});
      break;
    }

    const VisitationSampler sampler(mdp, pi, mu, config.sampler);
    std::optional<TwoLayerNet> qbar_net;
    StateActionFn xi_hat;
    if (config.critic_oracle) {
      if (!eval) eval = soft_policy_eval(mdp, pi, config.lambda, mu);
      xi_hat = [table = eval->soft_adv](int s, int a) { return table(s, a); };
    } else {
      TwoLayerNet critic_init = warm_critic && config.critic_warm_start
                                    ? *warm_critic
                                    : TwoLayerNet::sym_init(config.critic_width, features.dim,
                                                            derive_seed(seed, 1000 + static_cast<std::uint64_t>(t)));
      qbar_net =
          mn_ntd_from(std::move(critic_init), mdp, features, pi, config.lambda, critic_cfg, sampler, critic_rng);
      if (config.critic_warm_start) warm_critic = *qbar_net;

      xi_hat = soft_advantage_estimate(soft_q_estimate(critic_q(*qbar_net, features), pi, config.lambda, config.soft_q_sign), pi);
      if (config.exact_diagnostics) {
        const Matrix qbar = tabulate(critic_q(*qbar_net, features), mdp.n_states, mdp.n_actions);
        row.critic_rmse = std::sqrt((qbar - eval->q_lambda).array().square().mean());
        xi_hat = [table = tabulate(xi_hat, mdp.n_states, mdp.n_actions)](int s, int a) { return table(s, a); };
      }
    }

    const Matrix u = sgd_inner_loop(actor, features, xi_hat, sampler, actor_rng);
    row.u_row_norm_max = max_row_norm(u);
    if (config.exact_diagnostics) {
      row.eps_bias = measure_bias(actor.net, features, u, pi, optimum->pi_star, d_star, eval->q_soft);
    }
    if (observer) observer(IterationView{t, actor, pi, qbar_net ? &*qbar_net : nullptr, &u, row});

    const Matrix w = nac_update(actor, u);
    const double w_row = max_row_norm(w);
    run.w_row_margin_min = std::min(run.w_row_margin_min, w_bound - w_row);
    if (!(w_row <= w_bound + kArithmeticSlack)) violation(t, "w_t row norm exceeds 2R/sqrt(m)");

    run.wallclock_ms.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    run.rows.push_back(row);
  }
  return run;
}

}  // namespace nac
