#include "nac/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "nac/actor.hpp"
#include "nac/critic.hpp"
#include "nac/error.hpp"

namespace nac {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ValidationError("unknown config key '" + where + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("config field '" + where + key + "': " + e.what());
  }
}

// number, or the "paper-default" token
std::optional<double> read_step(const json& obj, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (v.is_string() && v.get<std::string>() == "paper-default") return std::nullopt;
  if (v.is_number()) return v.get<double>();
  throw ValidationError(std::string("config field '") + key + "' must be a number or \"paper-default\"");
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  reject_unknown(doc, "",
                 {"mdp", "features", "lambda", "radius", "critic_radius", "actor_width", "critic_width", "iterations",
                  "critic_iterations", "inner_iterations", "actor_step", "critic_step", "critic_epsilon",
                  "critic_warm_start", "critic_oracle", "soft_q_sign", "schedule", "sampler", "seeds", "exact_diagnostics", "report_delta",
                  "nu_bar", "k_transport", "output"});
  ExperimentConfig c;
  if (doc.contains("mdp")) {
    const json& m = doc.at("mdp");
    reject_unknown(m, "mdp.", {"kind", "gamma", "r_max", "width", "height", "goal", "slip", "rewards",
                               "n_states", "n_actions", "seed"});
    read(m, "kind", c.mdp.kind, "mdp.");
    read(m, "gamma", c.mdp.gamma, "mdp.");
    read(m, "r_max", c.mdp.r_max, "mdp.");
    read(m, "width", c.mdp.width, "mdp.");
    read(m, "height", c.mdp.height, "mdp.");
    read(m, "slip", c.mdp.slip, "mdp.");
    read(m, "rewards", c.mdp.rewards, "mdp.");
    read(m, "n_states", c.mdp.n_states, "mdp.");
    read(m, "n_actions", c.mdp.n_actions, "mdp.");
    read(m, "seed", c.mdp.seed, "mdp.");
    if (m.contains("goal")) {
      std::vector<int> goal;
      read(m, "goal", goal, "mdp.");
      if (goal.size() != 2) throw ValidationError("config field 'mdp.goal' must be [x, y]");
      c.mdp.goal_x = goal[0];
      c.mdp.goal_y = goal[1];
    }
  }
  if (doc.contains("features")) {
    const json& f = doc.at("features");
    reject_unknown(f, "features.", {"kind", "dim", "seed"});
    std::string kind = to_string(c.feature_kind);
    read(f, "kind", kind, "features.");
    c.feature_kind = parse_feature_kind(kind);
    read(f, "dim", c.feature_dim, "features.");
    read(f, "seed", c.feature_seed, "features.");
  }
  read(doc, "lambda", c.lambda, "");
  read(doc, "radius", c.radius, "");
  if (doc.contains("critic_radius") && !doc.at("critic_radius").is_null()) {
    double r = 0.0;
    read(doc, "critic_radius", r, "");
    c.critic_radius = r;
  }
  read(doc, "actor_width", c.actor_width, "");
  read(doc, "critic_width", c.critic_width, "");
  read(doc, "iterations", c.iterations, "");
  read(doc, "critic_iterations", c.critic_iterations, "");
  read(doc, "inner_iterations", c.inner_iterations, "");
  c.actor_step = read_step(doc, "actor_step");
  c.critic_step = read_step(doc, "critic_step");
  read(doc, "critic_epsilon", c.critic_epsilon, "");
  read(doc, "critic_warm_start", c.critic_warm_start, "");
  read(doc, "critic_oracle", c.critic_oracle, "");
  if (doc.contains("soft_q_sign")) {
    std::string sign;
    read(doc, "soft_q_sign", sign, "");
    c.soft_q_sign = parse_soft_q_sign(sign);
  }
  if (doc.contains("schedule")) {
    const json& s = doc.at("schedule");
    reject_unknown(s, "schedule.", {"kind", "eta"});
    std::string kind = "adaptive";
    read(s, "kind", kind, "schedule.");
    if (kind == "adaptive") {
      c.schedule = StepSchedule::adaptive();
    } else if (kind == "constant") {
      double eta = 0.0;
      read(s, "eta", eta, "schedule.");
      c.schedule = StepSchedule::constant(eta);
    } else {
      throw ValidationError("config field 'schedule.kind' must be adaptive or constant");
    }
  }
  if (doc.contains("sampler")) {
    const json& s = doc.at("sampler");
    reject_unknown(s, "sampler.", {"mode", "max_horizon"});
    std::string mode = "exact";
    read(s, "mode", mode, "sampler.");
    int horizon = 0;
    read(s, "max_horizon", horizon, "sampler.");
    if (mode == "exact") {
      c.sampler = SamplerMode::exact();
    } else if (mode == "rollout") {
      c.sampler = SamplerMode::rollout(horizon);
    } else {
      throw ValidationError("config field 'sampler.mode' must be rollout or exact");
    }
  }
  read(doc, "seeds", c.seeds, "");
  read(doc, "exact_diagnostics", c.exact_diagnostics, "");
  read(doc, "report_delta", c.report_delta, "");
  if (doc.contains("nu_bar") && !doc.at("nu_bar").is_null()) c.nu_bar = doc.at("nu_bar").get<double>();
  if (doc.contains("k_transport") && !doc.at("k_transport").is_null()) {
    c.k_transport = doc.at("k_transport").get<int>();
  }
  read(doc, "output", c.output, "");
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json mdp = {{"kind", c.mdp.kind}, {"gamma", c.mdp.gamma}, {"r_max", c.mdp.r_max}};
  if (c.mdp.kind == "gridworld") {
    mdp["width"] = c.mdp.width;
    mdp["height"] = c.mdp.height;
    mdp["goal"] = {c.mdp.goal_x, c.mdp.goal_y};
    mdp["slip"] = c.mdp.slip;
  } else if (c.mdp.kind == "bandit") {
    mdp["rewards"] = c.mdp.rewards;
  } else {
    mdp["n_states"] = c.mdp.n_states;
    mdp["n_actions"] = c.mdp.n_actions;
    mdp["seed"] = c.mdp.seed;
  }
  json schedule = {{"kind", c.schedule.kind == StepSchedule::Kind::adaptive ? "adaptive" : "constant"}};
  if (c.schedule.kind == StepSchedule::Kind::constant) schedule["eta"] = c.schedule.eta;
  json out = {
      {"mdp", mdp},
      {"features", {{"kind", to_string(c.feature_kind)}, {"dim", c.feature_dim}, {"seed", c.feature_seed}}},
      {"lambda", c.lambda},
      {"radius", c.radius},
      {"critic_radius", c.critic_radius ? json(*c.critic_radius) : json(nullptr)},
      {"actor_width", c.actor_width},
      {"critic_width", c.critic_width},
      {"iterations", c.iterations},
      {"critic_iterations", c.critic_iterations},
      {"inner_iterations", c.inner_iterations},
      {"actor_step", c.actor_step ? json(*c.actor_step) : json("paper-default")},
      {"critic_step", c.critic_step ? json(*c.critic_step) : json("paper-default")},
      {"critic_epsilon", c.critic_epsilon},
      {"critic_warm_start", c.critic_warm_start},
      {"critic_oracle", c.critic_oracle},
      {"soft_q_sign", to_string(c.soft_q_sign)},
      {"schedule", schedule},
      {"sampler",
       {{"mode", c.sampler.kind == SamplerMode::Kind::exact ? "exact" : "rollout"},
        {"max_horizon", c.sampler.max_horizon}}},
      {"seeds", c.seeds},
      {"exact_diagnostics", c.exact_diagnostics},
      {"report_delta", c.report_delta},
      {"nu_bar", c.nu_bar ? json(*c.nu_bar) : json(nullptr)},
      {"k_transport", c.k_transport ? json(*c.k_transport) : json(nullptr)},
      {"output", c.output},
  };
  return out;
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ValidationError("config field '" + field + "': " + why);
  };
  if (c.mdp.kind != "gridworld" && c.mdp.kind != "bandit" && c.mdp.kind != "random") {
    fail("mdp.kind", "must be gridworld, bandit or random");
  }
  if (!(c.mdp.gamma > 0.0 && c.mdp.gamma < 1.0)) fail("mdp.gamma", "discount out of range (0, 1)");
  if (c.mdp.kind == "bandit" && c.mdp.rewards.empty()) fail("mdp.rewards", "bandit needs rewards");
  if (c.actor_width < 2 || c.actor_width % 2) fail("actor_width", "m must be even and >= 2");
  if (c.critic_width < 2 || c.critic_width % 2) fail("critic_width", "m' must be even and >= 2");
  if (!(c.lambda > 0.0)) fail("lambda", "must be > 0");
  if (!(c.radius > 0.0)) fail("radius", "must be > 0");
  if (c.critic_radius && !(*c.critic_radius > 0.0)) fail("critic_radius", "must be > 0");
  if (c.iterations < 0) fail("iterations", "T must be >= 0");
  if (c.critic_iterations < 1) fail("critic_iterations", "T' must be >= 1");
  if (c.inner_iterations < 1) fail("inner_iterations", "N must be >= 1");
  if (c.actor_step && !(*c.actor_step > 0.0)) fail("actor_step", "must be > 0");
  if (c.critic_step && !(*c.critic_step > 0.0)) fail("critic_step", "must be > 0");
  if (!(c.critic_epsilon > 0.0)) fail("critic_epsilon", "must be > 0");
  if (c.schedule.kind == StepSchedule::Kind::constant &&
      !(c.schedule.eta > 0.0 && c.schedule.eta < 1.0 / c.lambda)) {
    fail("schedule.eta", "constant step must lie in (0, 1/lambda)");
  }
  if (c.sampler.kind == SamplerMode::Kind::rollout && c.sampler.max_horizon < 0) {
    fail("sampler.max_horizon", "must be >= 1 (or 0 for the default)");
  }
  if (c.seeds.empty()) fail("seeds", "need at least one seed");
  if (!(c.report_delta > 0.0 && c.report_delta < 1.0)) fail("report_delta", "must lie in (0, 1)");
}

std::string config_hash(const ExperimentConfig& config) {
  json doc = to_json(config);
  doc.erase("seeds");
  doc.erase("output");
  const std::string text = doc.dump();  // keys are sorted, so the dump is canonical
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FiniteMdp build_mdp(const MdpSpec& spec) {
  if (spec.kind == "gridworld") {
    GridRewardSpec reward;
    reward.goal_x = spec.goal_x;
    reward.goal_y = spec.goal_y;
    reward.r_max = spec.r_max;
    reward.slip = spec.slip;
    return build_gridworld(spec.width, spec.height, spec.gamma, reward);
  }
  if (spec.kind == "bandit") return build_bandit(spec.rewards, spec.gamma, spec.r_max);
  if (spec.kind == "random") return build_random_mdp(spec.n_states, spec.n_actions, spec.gamma, spec.seed, spec.r_max);
  throw ValidationError("unknown mdp kind '" + spec.kind + "'");
}

FeatureMap build_features(const ExperimentConfig& config, const FiniteMdp& mdp) {
  return build_feature_map(mdp, config.feature_kind, config.feature_dim, config.feature_seed);
}

double effective_actor_step(const ExperimentConfig& config, const FiniteMdp& mdp) {
  if (config.actor_step) return *config.actor_step;
  const double qm = q_max(config.radius, mdp.r_max, mdp.gamma, config.lambda, mdp.n_actions);
  return default_inner_step(config.radius, qm, config.inner_iterations);
}

double effective_critic_step(const ExperimentConfig& config, const FiniteMdp& mdp) {
  if (config.critic_step) return *config.critic_step;
  return default_critic_step(config.critic_epsilon, mdp.gamma, effective_critic_radius(config));
}

double effective_critic_radius(const ExperimentConfig& config) { return config.critic_radius.value_or(config.radius); }

}  // namespace nac
