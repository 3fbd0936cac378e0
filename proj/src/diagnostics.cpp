#include "nac/diagnostics.hpp"

#include <cmath>
#include <sstream>

#include "nac/error.hpp"
#include "nac/rng.hpp"
#include "nac/train.hpp"

namespace nac {

double rho0(double r0, int m, double delta, int d) {
  if (m < 1) throw ValidationError("rho0 needs m >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("rho0 needs delta in (0, 1)");
  const double md = static_cast<double>(m);
  return 16.0 * r0 / std::sqrt(md) * (r0 + std::sqrt(std::log(1.0 / delta)) + std::sqrt(d * std::log(md)));
}

double persistence_bound(double radius, double lambda, int m, const StepSchedule& schedule, int t) {
  return radius * kappa(schedule, t, lambda) / (lambda * std::sqrt(static_cast<double>(m)));
}

PersistenceReport check_persistence(std::span<const double> max_deviations, double radius, double lambda,
                                    int m, const StepSchedule& schedule, double slack) {
  PersistenceReport report;
  for (int t = 0; t < static_cast<int>(max_deviations.size()); ++t) {
    const double bound = persistence_bound(radius, lambda, m, schedule, t);
    const double margin = bound - max_deviations[t];
    if (margin < report.min_margin) {
      report.min_margin = margin;
      report.tightest_t = t;
    }
    if (!(max_deviations[t] <= bound + slack)) {
      std::ostringstream os;
      os.precision(17);
      os << "persistence bound violated at t = " << t << ": deviation " << max_deviations[t] << " > bound "
         << bound;
      throw InvariantViolation(os.str());
    }
  }
  return report;
}

LazyDeviation lazy_deviation(const TwoLayerNet& net, const Matrix& probes) {
  return lazy_deviation(net, probes, net.hidden() - net.hidden_init());
}

LazyDeviation lazy_deviation(const TwoLayerNet& net, const Matrix& probes, const Matrix& direction) {
  const Matrix pre0 = probes * net.hidden_init().transpose();
  const Matrix pre = probes * net.hidden().transpose();
  const Matrix pre_dir = probes * direction.transpose();
  LazyDeviation out;
  for (int p = 0; p < probes.rows(); ++p) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < net.width(); ++i) {
      if ((pre(p, i) >= 0.0) == (pre0(p, i) >= 0.0)) continue;
      s0 += std::abs(pre0(p, i));
      s1 += std::abs(pre(p, i));
      s2 += std::abs(pre_dir(p, i));
    }
    out.init_preactivation = std::max(out.init_preactivation, net.scale() * s0);
    out.current_preactivation = std::max(out.current_preactivation, net.scale() * s1);
    out.direction = std::max(out.direction, net.scale() * s2);
  }
  return out;
}

Matrix lazy_probe_points(const FeatureMap& features, int n_random, std::uint64_t seed) {
  Matrix probes(features.table.rows() + n_random, features.dim);
  probes.topRows(features.table.rows()) = features.table;
  Rng rng = make_rng(seed, 0x70726f6265);
  for (int i = 0; i < n_random; ++i) {
    probes.row(features.table.rows() + i) = random_unit_vector(features.dim, rng).transpose();
  }
  return probes;
}

namespace {

// log-softmax over each row
Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (int s = 0; s < logits.rows(); ++s) out.row(s) = logits.row(s).array() - log_sum_exp(logits.row(s));
  return out;
}

Matrix to_state_action(const Vector& flat, int n_states, int n_actions) {
  Matrix out(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) out(s, a) = flat[s * n_actions + a];
  }
  return out;
}

}  // namespace

Matrix linearized_output(const TwoLayerNet& net, const FeatureMap& features, const Matrix& u) {
  const Matrix pre0 = features.table * net.hidden_init().transpose();
  const Matrix proj = features.table * u.transpose();
  Vector flat(features.table.rows());
  for (int p = 0; p < pre0.rows(); ++p) {
    double acc = 0.0;
    for (int i = 0; i < net.width(); ++i) {
      if (pre0(p, i) >= 0.0) acc += net.out_weights()[i] * proj(p, i);
    }
    flat[p] = net.scale() * acc;
  }
  return to_state_action(flat, features.n_states, features.n_actions);
}

double log_linear_gap(const TwoLayerNet& net, const FeatureMap& features) {
  const Matrix log_pi = log_softmax_rows(logits_table(net, features));
  const Matrix log_tilde = log_softmax_rows(linearized_output(net, features, net.hidden()));
  return (log_tilde - log_pi).cwiseAbs().maxCoeff();
}

Matrix analytic_policy_gradient(const FiniteMdp& mdp, const FeatureMap& features, const TwoLayerNet& net,
                                double lambda, const Vector& mu) {
  const PolicyTable pi = policy_table(net, features);
  const ExactPolicyEval eval = soft_policy_eval(mdp, pi, lambda, mu);
  ScoreCache scores(net, features);
  Matrix grad = Matrix::Zero(net.width(), net.dim());
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      grad += (eval.visitation[s] * pi(s, a) * eval.q_lambda(s, a)) * scores.score(s, a);
    }
  }
  return grad / (1.0 - mdp.gamma);
}

double kink_margin(const TwoLayerNet& net, const FeatureMap& features) {
  return (features.table * net.hidden().transpose()).cwiseAbs().minCoeff();
}

GradientCheck fd_policy_gradient_check(const FiniteMdp& mdp, const FeatureMap& features,
                                       const TwoLayerNet& net, double lambda, const Vector& mu, double h) {
  auto value_at = [&](const Matrix& hidden) {
    TwoLayerNet probe(net.out_weights(), net.hidden_init(), hidden);
    return regularized_value(soft_policy_eval(mdp, policy_table(probe, features), lambda, mu), mu);
  };
  Matrix fd(net.width(), net.dim());
  Matrix hidden = net.hidden();
  for (int i = 0; i < net.width(); ++i) {
    for (int j = 0; j < net.dim(); ++j) {
      const double keep = hidden(i, j);
      hidden(i, j) = keep + h;
      const double up = value_at(hidden);
      hidden(i, j) = keep - h;
      const double down = value_at(hidden);
      hidden(i, j) = keep;
      fd(i, j) = (up - down) / (2.0 * h);
    }
  }
  const Matrix analytic = analytic_policy_gradient(mdp, features, net, lambda, mu);
  GradientCheck out;
  out.finite_difference_norm = fd.norm();
  out.analytic_norm = analytic.norm();
  const double diff = (fd - analytic).norm();
  const double scale = std::max(out.finite_difference_norm, out.analytic_norm);
  out.relative_error = scale > 1e-12 ? diff / scale : diff;
  return out;
}

Matrix ntk_feature_matrix(const TwoLayerNet& net, const FeatureMap& features) {
  const int m = net.width();
  const int d = net.dim();
  Matrix phi(features.table.rows(), m * d);
  for (int p = 0; p < features.table.rows(); ++p) {
    const Matrix g = net.grad_hidden(features.table.row(p).transpose(), Weights::init);
    for (int i = 0; i < m; ++i) phi.block(p, i * d, 1, d) = g.row(i);
  }
  return phi;
}

CompatibleFit compatible_fit_error(const TwoLayerNet& net, const FeatureMap& features, const Matrix& target,
                                   const Matrix& weights, double radius) {
  if (target.rows() != features.n_states || target.cols() != features.n_actions ||
      weights.rows() != target.rows() || weights.cols() != target.cols()) {
    throw ValidationError("compatible fit: target and weight tables must be n_states x n_actions");
  }
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw ValidationError("compatible fit: weights must be a probability table");
  }
  const Matrix phi = ntk_feature_matrix(net, features);
  const int n = static_cast<int>(phi.rows());
  Vector sqrt_w(n), y(n);
  for (int s = 0; s < features.n_states; ++s) {
    for (int a = 0; a < features.n_actions; ++a) {
      sqrt_w[s * features.n_actions + a] = std::sqrt(weights(s, a));
      y[s * features.n_actions + a] = target(s, a);
    }
  }
  const Matrix weighted = sqrt_w.asDiagonal() * phi;
  // minimum-norm solution of the (typically wide) weighted system
  const Vector coef = weighted.completeOrthogonalDecomposition().solve(sqrt_w.cwiseProduct(y));

  CompatibleFit out;
  out.u_star = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      coef.data(), net.width(), net.dim());
  out.u_projected = project_rows_ball(out.u_star, radius);
  auto rms = [&](const Matrix& u) {
    const Matrix fit = linearized_output(net, features, u);
    return std::sqrt((weights.array() * (fit - target).array().square()).sum());
  };
  out.residual = rms(out.u_star);
  out.residual_projected = rms(out.u_projected);
  return out;
}

double measure_bias(const TwoLayerNet& net, const FeatureMap& features, const Matrix& u, const PolicyTable& pi,
                    const PolicyTable& pi_star, const Vector& d_star, const Matrix& q_soft) {
  const Matrix fit_error = linearized_output(net, features, u) - q_soft;
  const Vector per_state = ((pi - pi_star).array() * fit_error.array()).rowwise().sum();
  return d_star.dot(per_state);
}

double mismatch_coefficient(const Vector& d_star, const Vector& d_t) {
  double acc = 0.0;
  for (int s = 0; s < d_star.size(); ++s) {
    if (d_star[s] == 0.0) continue;
    if (d_t[s] <= 0.0) return std::numeric_limits<double>::infinity();
    acc += d_star[s] * d_star[s] / d_t[s];
  }
  return std::sqrt(acc);
}

double mismatch_coefficient_pairs(const Vector& d_star, const PolicyTable& pi_star, const Vector& d_t,
                                  const PolicyTable& pi_t) {
  double acc = 0.0;
  for (int s = 0; s < d_star.size(); ++s) {
    for (int a = 0; a < pi_star.cols(); ++a) {
      const double num = d_star[s] * pi_star(s, a);
      if (num == 0.0) continue;
      const double den = d_t[s] * pi_t(s, a);
      if (den <= 0.0) return std::numeric_limits<double>::infinity();
      acc += num * num / den;
    }
  }
  return std::sqrt(acc);
}

double performance_difference_residual(const FiniteMdp& mdp, const PolicyTable& pi, const PolicyTable& pi_prime,
                                       double lambda, const Vector& mu) {
  const ExactPolicyEval e = soft_policy_eval(mdp, pi, lambda, mu);
  const ExactPolicyEval e_prime = soft_policy_eval(mdp, pi_prime, lambda, mu);
  double rhs = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    double inner = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      double term = e_prime.adv(s, a);
      if (lambda > 0.0) term += lambda * std::log(pi_prime(s, a) / pi(s, a));
      inner += pi(s, a) * term;
    }
    rhs += e.visitation[s] * inner;
  }
  rhs /= 1.0 - mdp.gamma;
  const double lhs = regularized_value(e, mu) - regularized_value(e_prime, mu);
  return std::abs(lhs - rhs);
}

DriftTrace drift_trace(const NacRunState& run) {
  DriftTrace trace;
  trace.rows = run.rows;
  std::vector<double> deltas;
  deltas.reserve(run.rows.size());
  for (const auto& row : run.rows) deltas.push_back(row.delta);
  if (deltas.size() >= 3) {
    try {
      trace.rate = fit_rate(deltas);
    } catch (const ValidationError&) {
      // fewer than two positive points: leave the slope at 0
    }
  }
  return trace;
}

}  // namespace nac
