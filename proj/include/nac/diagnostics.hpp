#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "nac/actor.hpp"
#include "nac/mdp.hpp"
#include "nac/net.hpp"
#include "nac/oracle.hpp"
#include "nac/rate.hpp"
#include "nac/schedule.hpp"
#include "nac/types.hpp"

namespace nac {

/// (16 R0 / sqrt m) (R0 + sqrt(log(1/delta)) + sqrt(d log m)).
double rho0(double r0, int m, double delta, int d);

/// Deterministic parameter-drift bound R kappa_t / (lambda sqrt m).
double persistence_bound(double radius, double lambda, int m, const StepSchedule& schedule, int t);

struct PersistenceReport {
  double min_margin = std::numeric_limits<double>::infinity();
  int tightest_t = 0;
};

/// Checks max_i ||theta_i(t) - theta_i(0)|| <= R kappa_t / (lambda sqrt m) for
/// every t in the trace (entry t is the deviation after t updates). Throws
/// InvariantViolation naming the first offending t.
PersistenceReport check_persistence(std::span<const double> max_deviations, double radius, double lambda,
                                    int m, const StepSchedule& schedule, double slack = 1e-12);

struct LazyDeviation {
  double init_preactivation = 0.0;     // sum over flips of |theta_i(0) . x|
  double current_preactivation = 0.0;  // sum over flips of |theta_i . x|
  double direction = 0.0;              // sum over flips of |theta'_i . x|
};

/// Empirical maxima over probe rows of the three indicator-flip sums, each
/// scaled by 1/sqrt m. The third sum uses theta' = theta - theta(0).
LazyDeviation lazy_deviation(const TwoLayerNet& net, const Matrix& probes);

/// Same with an explicit theta'.
LazyDeviation lazy_deviation(const TwoLayerNet& net, const Matrix& probes, const Matrix& direction);

/// Every embedded pair plus `n_random` uniform unit vectors.
Matrix lazy_probe_points(const FeatureMap& features, int n_random, std::uint64_t seed);

/// max over (s, a) of |log(pi_tilde / pi)| where pi_tilde is the softmax of
/// the linearization <grad f_0(s, a), theta(t)>.
double log_linear_gap(const TwoLayerNet& net, const FeatureMap& features);

/// Gradient of V_lambda^pi(mu) in the hidden weights via the score-function
/// identity (1 / (1 - gamma)) E_{d, pi}[grad log pi * q_lambda], evaluated
/// exactly from the oracle.
Matrix analytic_policy_gradient(const FiniteMdp& mdp, const FeatureMap& features, const TwoLayerNet& net,
                                double lambda, const Vector& mu);

/// Smallest |theta_i . x| over all units and embedded pairs.
double kink_margin(const TwoLayerNet& net, const FeatureMap& features);

struct GradientCheck {
  double relative_error = 0.0;
  double finite_difference_norm = 0.0;
  double analytic_norm = 0.0;
};

/// Central differences of the exact V_lambda^pi(mu) in every hidden
/// coordinate against the analytic gradient. Relative Frobenius error; when
/// both sides vanish the error is the absolute difference.
GradientCheck fd_policy_gradient_check(const FiniteMdp& mdp, const FeatureMap& features,
                                       const TwoLayerNet& net, double lambda, const Vector& mu, double h);

struct CompatibleFit {
  Matrix u_star;             // minimum-norm weighted least-squares solution
  Matrix u_projected;        // rows clipped to R / sqrt m
  double residual = 0.0;     // weighted RMS of <grad f_0, u*> - Q
  double residual_projected = 0.0;
};

/// Feature matrix whose row (s, a) is vec(grad f_0(s, a)) (row-major in the
/// hidden weights).
Matrix ntk_feature_matrix(const TwoLayerNet& net, const FeatureMap& features);

/// <grad f_0(s, a), u> for every pair.
Matrix linearized_output(const TwoLayerNet& net, const FeatureMap& features, const Matrix& u);

/// min_u sum w(s,a) (<grad f_0(s, a), u> - Q(s, a))^2 with weights summing to 1.
CompatibleFit compatible_fit_error(const TwoLayerNet& net, const FeatureMap& features, const Matrix& target,
                                   const Matrix& weights, double radius);

/// eps_bias = E_{s ~ d*}[sum_a (pi_t - pi*)(<grad f_0, u_t> - Q_t)].
double measure_bias(const TwoLayerNet& net, const FeatureMap& features, const Matrix& u, const PolicyTable& pi,
                    const PolicyTable& pi_star, const Vector& d_star, const Matrix& q_soft);

/// sqrt(E_{s ~ d_t}[(d*(s) / d_t(s))^2]).
double mismatch_coefficient(const Vector& d_star, const Vector& d_t);

/// Pair analog over d_t x pi_t.
double mismatch_coefficient_pairs(const Vector& d_star, const PolicyTable& pi_star, const Vector& d_t,
                                  const PolicyTable& pi_t);

/// |V^pi(mu) - V^pi'(mu) - (1/(1-gamma)) E_{d^pi, pi}[A^pi' + lambda log(pi'/pi)]|.
double performance_difference_residual(const FiniteMdp& mdp, const PolicyTable& pi, const PolicyTable& pi_prime,
                                       double lambda, const Vector& mu);

/// One iteration's analysis quantities. Fields that do not apply (no update
/// at the final iterate, diagnostics disabled) hold NaN.
struct DriftRow {
  int t = 0;
  double v_lambda = kNaN;
  double delta = kNaN;
  double psi = kNaN;
  double max_param_dev = kNaN;
  double pi_min_emp = kNaN;
  double sup_f = kNaN;
  double log_linear_gap = kNaN;
  double mismatch_c = kNaN;
  double mismatch_c_tilde = kNaN;
  double eps_bias = kNaN;
  double critic_rmse = kNaN;
  double u_row_norm_max = kNaN;

  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
};

struct DriftTrace {
  std::vector<DriftRow> rows;
  RateFit rate;  // log-log slope of running-min Delta
};

struct NacRunState;

/// Packages a finished run's rows and fits the rate over t >= 1.
DriftTrace drift_trace(const NacRunState& run);

}  // namespace nac
