#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nac/critic.hpp"
#include "nac/mdp.hpp"
#include "nac/sampler.hpp"
#include "nac/schedule.hpp"

namespace nac {

/// Which MDP to build. `gridworld` uses width/height/goal/slip, `bandit`
/// uses rewards, `random` uses n_states/n_actions/seed.
struct MdpSpec {
  std::string kind = "gridworld";
  double gamma = 0.9;
  double r_max = 1.0;
  int width = 4;
  int height = 4;
  int goal_x = -1;
  int goal_y = -1;
  double slip = 0.0;
  std::vector<double> rewards;
  int n_states = 3;
  int n_actions = 2;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  MdpSpec mdp;
  FeatureKind feature_kind = FeatureKind::grid;
  int feature_dim = 0;  // 0: natural dimension for the kind
  std::uint64_t feature_seed = 0;

  double lambda = 0.05;
  double radius = 2.0;
  std::optional<double> critic_radius;  // empty: same as radius
  int actor_width = 256;      // m
  int critic_width = 256;     // m'
  int iterations = 200;       // T
  int critic_iterations = 10000;  // T'
  int inner_iterations = 500;     // N
  std::optional<double> actor_step;   // alpha_A; empty selects R / sqrt(q_max N)
  std::optional<double> critic_step;  // alpha_C; empty selects eps^2 (1-gamma) / (1+2R)^2
  double critic_epsilon = 0.1;
  bool critic_warm_start = false;
  SoftQSign soft_q_sign = SoftQSign::consistent;
  bool critic_oracle = false;  // feed the actor the exact soft advantage instead of MN-NTD

  StepSchedule schedule = StepSchedule::adaptive();
  SamplerMode sampler = SamplerMode::exact();
  std::vector<std::uint64_t> seeds{1};
  bool exact_diagnostics = true;
  double report_delta = 0.1;  // delta used for rho_0 reporting
  std::optional<double> nu_bar;
  std::optional<int> k_transport;
  std::string output;
};

/// Parses the JSON config. Unknown keys anywhere are rejected with their path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Throws ValidationError naming the offending field.
void validate(const ExperimentConfig& config);

/// Stable 64-bit FNV-1a of the canonical JSON form (seeds and output path
/// excluded), as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

FiniteMdp build_mdp(const MdpSpec& spec);
FeatureMap build_features(const ExperimentConfig& config, const FiniteMdp& mdp);

double effective_actor_step(const ExperimentConfig& config, const FiniteMdp& mdp);
double effective_critic_step(const ExperimentConfig& config, const FiniteMdp& mdp);
double effective_critic_radius(const ExperimentConfig& config);

}  // namespace nac
