// Command-line front end: solve, train, critic-fit, diagnose, sweep.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nac/actor.hpp"
#include "nac/config.hpp"
#include "nac/critic.hpp"
#include "nac/diagnostics.hpp"
#include "nac/error.hpp"
#include "nac/harness.hpp"
#include "nac/oracle.hpp"
#include "nac/sampler.hpp"

namespace {

using namespace nac;

struct CommonFlags {
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::string sampler_mode;
  int max_horizon = -1;
  std::string exact_diagnostics;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_out = true) {
  cmd->add_option("--config", f.config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed,--seeds", f.seeds, "seed(s); overrides the config");
  if (with_out) cmd->add_option("--out,--metrics-out", f.out, "output CSV path (default: stdout)");
  cmd->add_option("--sampler-mode", f.sampler_mode, "rollout or exact")
      ->check(CLI::IsMember({"rollout", "exact"}));
  cmd->add_option("--max-horizon", f.max_horizon, "rollout horizon cap (0: ceil(10/(1-gamma)))");
  cmd->add_option("--exact-diagnostics", f.exact_diagnostics, "true/false")
      ->check(CLI::IsMember({"true", "false", "1", "0"}));
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c = load_config(f.config_path);
  if (!f.seeds.empty()) c.seeds = f.seeds;
  if (f.sampler_mode == "exact") c.sampler = SamplerMode::exact();
  if (f.sampler_mode == "rollout") c.sampler = SamplerMode::rollout(c.sampler.max_horizon);
  if (f.max_horizon >= 0) c.sampler.max_horizon = f.max_horizon;
  if (!f.exact_diagnostics.empty()) c.exact_diagnostics = f.exact_diagnostics == "true" || f.exact_diagnostics == "1";
  validate(c);
  return c;
}

// Writes to the named file, or stdout when the path is empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw IoError("cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_solve(const CommonFlags& f, double lambda_override) {
  const ExperimentConfig c = resolve(f);
  const double lambda = lambda_override > 0.0 ? lambda_override : c.lambda;
  const FiniteMdp mdp = build_mdp(c.mdp);
  const SoftOptimum opt = soft_optimal(mdp, lambda);
  const Vector d_star = visitation_distribution(mdp, opt.pi_star, mdp.init_dist);
  std::cerr << "V*(mu) = " << num(mdp.init_dist.dot(opt.v_star)) << "  (lambda = " << lambda
            << ", soft value iterations = " << opt.iterations << ")\n";
  Output out(f.out);
  auto& os = out.stream();
  os << "s,a,reward,Q_star,pi_star,V_star,d_star\n";
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      os << s << ',' << a << ',' << num(mdp.reward(s, a)) << ',' << num(opt.q_star(s, a)) << ','
         << num(opt.pi_star(s, a)) << ',' << num(opt.v_star[s]) << ',' << num(d_star[s]) << '\n';
    }
  }
  return 0;
}

int cmd_train(const CommonFlags& f, const std::string& checkpoint_out) {
  ExperimentConfig c = resolve(f);
  c.output.clear();
  const ExperimentResult result = run_experiment(c);
  Output out(f.out);
  write_metrics_header(out.stream());
  for (const auto& row : result.rows) write_metrics_row(out.stream(), row);
  for (const auto& run : result.runs) {
    std::cerr << "seed " << run.seed << ": Delta0 = " << num(run.delta0) << ", final Delta = " << num(run.final_delta)
              << ", min Delta = " << num(run.min_delta);
    if (run.rate_valid) std::cerr << ", log-log slope = " << num(run.rate.slope);
    std::cerr << '\n';
  }
  if (!checkpoint_out.empty()) save_checkpoint(checkpoint_out, result.states.back().actor.net);
  return 0;
}

int cmd_critic_fit(const CommonFlags& f, const std::vector<int>& checkpoints, const std::string& actor_path) {
  const ExperimentConfig c = resolve(f);
  const FiniteMdp mdp = build_mdp(c.mdp);
  const FeatureMap features = build_features(c, mdp);
  const PolicyTable pi = actor_path.empty() ? uniform_policy(mdp.n_states, mdp.n_actions)
                                            : policy_table(load_checkpoint(actor_path), features);
  const ExactPolicyEval eval = soft_policy_eval(mdp, pi, c.lambda, mdp.init_dist);
  const VisitationSampler sampler(mdp, pi, mdp.init_dist, c.sampler);
  Output out(f.out);
  out.stream() << "seed,T_prime,rmse,q_range\n";
  const double range = eval.q_lambda.maxCoeff() - eval.q_lambda.minCoeff();
  for (std::uint64_t seed : c.seeds) {
    for (int tp : checkpoints) {
      CriticConfig cc{c.critic_width, effective_critic_radius(c), tp, effective_critic_step(c, mdp)};
      const TwoLayerNet qbar = mn_ntd(mdp, features, pi, c.lambda, cc, sampler, seed);
      const Matrix table = tabulate(critic_q(qbar, features), mdp.n_states, mdp.n_actions);
      const double rmse = std::sqrt((table - eval.q_lambda).array().square().mean());
      out.stream() << seed << ',' << tp << ',' << num(rmse) << ',' << num(range) << '\n';
    }
  }
  return 0;
}

int cmd_diagnose(const CommonFlags& f, const std::string& checkpoint_path) {
  const ExperimentConfig c = resolve(f);
  const FiniteMdp mdp = build_mdp(c.mdp);
  const FeatureMap features = build_features(c, mdp);
  const TwoLayerNet net = load_checkpoint(checkpoint_path);
  if (net.dim() != features.dim) throw ValidationError("checkpoint dimension does not match the feature map");
  const int m = net.width();
  const double r0 = c.radius / c.lambda;
  const double rho = rho0(r0, m, c.report_delta, net.dim());

  Output out(f.out);
  auto& os = out.stream();
  os << "check,observed,bound,margin\n";
  auto emit = [&](const std::string& name, double observed, double bound) {
    os << name << ',' << num(observed) << ',' << num(bound) << ',' << num(bound - observed) << '\n';
  };

  // kappa_t <= 1 for both schedules
  emit("max_param_dev", net.max_row_deviation(), c.radius / (c.lambda * std::sqrt(static_cast<double>(m))));
  const LazyDeviation lazy = lazy_deviation(net, lazy_probe_points(features, 256, c.feature_seed));
  emit("lazy_dev_init", lazy.init_preactivation, rho);
  emit("lazy_dev_current", lazy.current_preactivation, rho);
  emit("lazy_dev_direction", lazy.direction, rho);
  emit("log_linear_gap", log_linear_gap(net, features), 3.0 * rho);
  const Matrix logits = logits_table(net, features);
  emit("sup_f", logits.cwiseAbs().maxCoeff(), r0 + rho);
  const PolicyTable pi = policy_table(net, features);
  // pi_min is a lower bound, so report bound - observed with the sign flipped
  const double pi_floor = std::exp(-2.0 * r0 - 2.0 * rho) / mdp.n_actions;
  os << "pi_min," << num(pi.minCoeff()) << ',' << num(pi_floor) << ',' << num(pi.minCoeff() - pi_floor) << '\n';

  const SoftOptimum opt = soft_optimal(mdp, c.lambda);
  const Vector d_star = visitation_distribution(mdp, opt.pi_star, mdp.init_dist);
  const ExactPolicyEval eval = soft_policy_eval(mdp, pi, c.lambda, mdp.init_dist);
  const double v_bound = (mdp.r_max + c.lambda * std::log(mdp.n_actions)) / (1.0 - mdp.gamma);
  emit("V_lambda", regularized_value(eval, mdp.init_dist), v_bound);
  const double delta = mdp.init_dist.dot(opt.v_star) - regularized_value(eval, mdp.init_dist);
  os << "Delta," << num(delta) << ",0," << num(delta) << '\n';
  const double psi = kl_potential(pi, opt.pi_star, d_star);
  os << "Psi," << num(psi) << ",0," << num(psi) << '\n';
  os << "mismatch_C," << num(mismatch_coefficient(d_star, eval.visitation)) << ",nan,nan\n";
  os << "mismatch_C_tilde," << num(mismatch_coefficient_pairs(d_star, opt.pi_star, eval.visitation, pi))
     << ",nan,nan\n";
  emit("pdl_residual", performance_difference_residual(mdp, pi, opt.pi_star, c.lambda, mdp.init_dist), 1e-8);
  if (m <= 64 && kink_margin(net, features) > 1e-5) {
    emit("fd_policy_gradient_rel_error",
         fd_policy_gradient_check(mdp, features, net, c.lambda, mdp.init_dist, 1e-5).relative_error, 1e-4);
  }
  if (c.nu_bar && c.k_transport) {
    const double d = net.dim();
    const double rho1 = 16.0 * *c.nu_bar / std::sqrt(static_cast<double>(m)) *
                        (std::pow(d * std::log(static_cast<double>(m)), 0.25) +
                         std::sqrt(std::log(*c.k_transport / c.report_delta)));
    os << "rho1," << num(rho1) << ",nan,nan\n";
  }
  return 0;
}

SweepGrid parse_grid(const std::string& spec) {
  // axis=v1,v2;axis2=v3
  SweepGrid grid;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ValidationError("sweep axis '" + part + "' lacks '='");
    std::vector<double> values;
    std::stringstream vs(part.substr(eq + 1));
    std::string v;
    while (std::getline(vs, v, ',')) values.push_back(std::stod(v));
    grid[part.substr(0, eq)] = values;
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-regularized neural natural actor-critic laboratory"};
  app.require_subcommand(1);

  CommonFlags solve_f, train_f, critic_f, diag_f, sweep_f;
  double lambda_override = -1.0;
  std::string checkpoint_out, actor_checkpoint, diag_checkpoint, grid_spec;
  std::vector<int> critic_checkpoints{1000, 10000, 50000};
  unsigned threads = 0;

  auto* solve = app.add_subcommand("solve", "exact soft-optimal policy and value tables as CSV");
  add_common(solve, solve_f);
  solve->add_option("--lambda", lambda_override, "override the config's lambda");

  auto* train_cmd = app.add_subcommand("train", "run neural NAC and write per-iteration metrics");
  add_common(train_cmd, train_f);
  train_cmd->add_option("--checkpoint-out", checkpoint_out, "save the final actor network");

  auto* critic = app.add_subcommand("critic-fit", "standalone MN-NTD study: RMSE against the exact q");
  add_common(critic, critic_f);
  critic->add_option("--checkpoints", critic_checkpoints, "T' values to evaluate")->delimiter(',');
  critic->add_option("--actor", actor_checkpoint, "actor checkpoint defining the policy (default: uniform)");

  auto* diag = app.add_subcommand("diagnose", "bound checks for a saved actor network");
  add_common(diag, diag_f);
  diag->add_option("--checkpoint", diag_checkpoint, "actor checkpoint")->required()->check(CLI::ExistingFile);

  auto* sweep_cmd = app.add_subcommand("sweep", "grid sweep with per-cell medians");
  add_common(sweep_cmd, sweep_f);
  sweep_cmd->add_option("--grid", grid_spec, "e.g. 'actor_width=16,64;schedule=0,10' (schedule 0 = adaptive)")
      ->required();
  sweep_cmd->add_option("--threads", threads, "worker threads (0: all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(solve_f, lambda_override);
    if (train_cmd->parsed()) return cmd_train(train_f, checkpoint_out);
    if (critic->parsed()) return cmd_critic_fit(critic_f, critic_checkpoints, actor_checkpoint);
    if (diag->parsed()) return cmd_diagnose(diag_f, diag_checkpoint);
    if (sweep_cmd->parsed()) {
      const ExperimentConfig c = resolve(sweep_f);
      const SweepResult result = sweep(c, parse_grid(grid_spec), threads);
      Output out(sweep_f.out);
      write_sweep_csv(out.stream(), result);
      return 0;
    }
  } catch (const nac::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
