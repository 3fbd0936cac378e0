#include "nac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <thread>

#include "nac/error.hpp"

namespace nac {

namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> columns{
      "t",          "seed",           "V_lambda",       "Delta",    "Psi",         "max_param_dev",
      "pi_min_emp", "sup_f",          "log_linear_gap", "mismatch_C", "mismatch_C_tilde", "eps_bias",
      "critic_rmse", "u_row_norm_max", "wallclock_ms",   "config_hash"};
  return columns;
}

void write_metrics_header(std::ostream& out) {
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_metrics_row(std::ostream& out, const MetricsRow& r) {
  const DriftRow& d = r.drift;
  out << d.t << ',' << r.seed;
  for (double v : {d.v_lambda, d.delta, d.psi, d.max_param_dev, d.pi_min_emp, d.sup_f, d.log_linear_gap,
                   d.mismatch_c, d.mismatch_c_tilde, d.eps_bias, d.critic_rmse, d.u_row_norm_max,
                   r.wallclock_ms}) {
    out << ',' << format_number(v);
  }
  out << ',' << r.config_hash << '\n';
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

RunSummary summarize(const NacRunState& run) {
  RunSummary s;
  s.seed = run.seed;
  s.delta0 = run.rows.front().delta;
  s.final_delta = run.rows.back().delta;
  s.min_delta = s.delta0;
  for (const auto& row : run.rows) s.min_delta = std::min(s.min_delta, row.delta);
  const DriftTrace trace = drift_trace(run);
  s.rate = trace.rate;
  s.rate_valid = trace.rate.used >= 2;
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const IterationObserver& observer) {
  validate(config);
  const FiniteMdp mdp = build_mdp(config.mdp);
  const FeatureMap features = build_features(config, mdp);
  ExperimentResult result;
  result.config_hash = config_hash(config);
  for (std::uint64_t seed : config.seeds) {
    NacRunState run = train(config, mdp, features, seed, observer);
    for (std::size_t i = 0; i < run.rows.size(); ++i) {
      result.rows.push_back(MetricsRow{run.rows[i], seed, run.wallclock_ms[i], result.config_hash});
    }
    result.runs.push_back(summarize(run));
    result.states.push_back(std::move(run));
  }
  if (!config.output.empty()) {
    std::ofstream out(config.output);
    if (!out) throw IoError("cannot open metrics output " + config.output);
    write_metrics_header(out);
    for (const auto& row : result.rows) write_metrics_row(out, row);
  }
  return result;
}

namespace {

void apply_axis(ExperimentConfig& c, const std::string& axis, double value) {
  if (axis == "actor_width") {
    c.actor_width = static_cast<int>(value);
  } else if (axis == "inner_iterations") {
    c.inner_iterations = static_cast<int>(value);
    // the default alpha_A depends on N and is recomputed from it
  } else if (axis == "critic_iterations") {
    c.critic_iterations = static_cast<int>(value);
  } else if (axis == "lambda") {
    c.lambda = value;
  } else if (axis == "schedule") {
    c.schedule = value == 0.0 ? StepSchedule::adaptive() : StepSchedule::constant(value);
  } else {
    throw ValidationError("unknown sweep axis '" + axis + "'");
  }
}

}  // namespace

SweepResult sweep(const ExperimentConfig& base, const SweepGrid& grid, unsigned threads) {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  for (const auto& [axis, values] : grid) {
    if (values.empty()) throw ValidationError("sweep axis '" + axis + "' has no values");
  }

  SweepResult result;
  std::vector<std::size_t> index(grid.size(), 0);
  for (;;) {
    SweepCell cell;
    cell.config = base;
    cell.config.output.clear();
    std::size_t k = 0;
    for (const auto& [axis, values] : grid) {
      cell.point[axis] = values[index[k]];
      apply_axis(cell.config, axis, values[index[k]]);
      ++k;
    }
    result.cells.push_back(std::move(cell));
    std::size_t pos = 0;
    auto it = grid.begin();
    while (pos < index.size() && ++index[pos] == it->second.size()) {
      index[pos] = 0;
      ++pos;
      ++it;
    }
    if (pos == index.size()) break;
  }

  // one work unit per cell; each unit owns its config and run state
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) {
      SweepCell& cell = result.cells[i];
      try {
        const ExperimentResult r = run_experiment(cell.config);
        cell.runs = r.runs;
        std::vector<double> finals, mins, at10;
        for (std::size_t j = 0; j < r.states.size(); ++j) {
          finals.push_back(r.runs[j].final_delta);
          mins.push_back(r.runs[j].min_delta);
          const auto& rows = r.states[j].rows;
          at10.push_back(rows[std::min<std::size_t>(10, rows.size() - 1)].delta);
        }
        cell.median_final_delta = median(finals);
        cell.median_min_delta = median(mins);
        cell.median_delta_at_10 = median(at10);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(result.cells.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  if (result.cells.empty()) return;
  for (const auto& [axis, _] : result.cells.front().point) out << axis << ',';
  out << "ok,n_seeds,median_delta0,median_final_delta,median_min_delta,median_delta_at_10,error\n";
  for (const auto& cell : result.cells) {
    for (const auto& [_, v] : cell.point) out << format_number(v) << ',';
    std::vector<double> d0;
    for (const auto& r : cell.runs) d0.push_back(r.delta0);
    std::string err = cell.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << (cell.ok ? 1 : 0) << ',' << cell.runs.size() << ',' << format_number(median(d0)) << ','
        << format_number(cell.median_final_delta) << ',' << format_number(cell.median_min_delta) << ','
        << format_number(cell.median_delta_at_10) << ',' << err << '\n';
  }
}

}  // namespace nac
