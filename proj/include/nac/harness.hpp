#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "nac/config.hpp"
#include "nac/diagnostics.hpp"
#include "nac/rate.hpp"
#include "nac/train.hpp"

namespace nac {

/// One CSV line: a drift row tagged with its run.
struct MetricsRow {
  DriftRow drift;
  std::uint64_t seed = 0;
  double wallclock_ms = 0.0;
  std::string config_hash;
};

/// Fixed column order of every metrics file.
const std::vector<std::string>& metrics_columns();

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsRow& row);

struct RunSummary {
  std::uint64_t seed = 0;
  double delta0 = 0.0;
  double final_delta = 0.0;
  double min_delta = 0.0;
  RateFit rate;
  bool rate_valid = false;
};

struct ExperimentResult {
  std::string config_hash;
  std::vector<MetricsRow> rows;
  std::vector<RunSummary> runs;
  std::vector<NacRunState> states;
};

RunSummary summarize(const NacRunState& run);

/// Trains once per seed in config.seeds and, when config.output is set,
/// writes the metrics CSV there.
ExperimentResult run_experiment(const ExperimentConfig& config, const IterationObserver& observer = {});

/// Axes of a sweep. Keys: actor_width, inner_iterations, critic_iterations,
/// lambda, schedule (constant steps given as eta; 0 means adaptive).
using SweepGrid = std::map<std::string, std::vector<double>>;

struct SweepCell {
  std::map<std::string, double> point;
  ExperimentConfig config;
  bool ok = false;
  std::string error;
  std::vector<RunSummary> runs;
  double median_final_delta = 0.0;
  double median_min_delta = 0.0;
  double median_delta_at_10 = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
};

/// Expands the cartesian product, runs the cells on up to `threads`
/// workers (0 = hardware concurrency) and aggregates medians over seeds.
/// A failing cell records its error and the sweep continues.
SweepResult sweep(const ExperimentConfig& base, const SweepGrid& grid, unsigned threads = 0);

void write_sweep_csv(std::ostream& out, const SweepResult& result);

double median(std::vector<double> values);

}  // namespace nac
