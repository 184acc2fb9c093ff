#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mwsched/analysis.hpp"
#include "mwsched/arrivals.hpp"
#include "mwsched/engine.hpp"
#include "mwsched/json_io.hpp"
#include "mwsched/model.hpp"
#include "mwsched/scheduling.hpp"

namespace mwsched {

struct ExperimentConfig {
  NetworkSpec network;
  std::vector<ArrivalSpec> arrivals;
  PolicySpec policy = MaxWeight{};
  std::int64_t horizon = 1'000'000;
  std::optional<std::int64_t> warmup;  // default_warmup(horizon) when unset
  int replications = 1;
  std::uint64_t base_seed = 1;
  StatsConfig stats;

  std::int64_t effective_warmup() const { return warmup.value_or(default_warmup(horizon)); }
  // Replication i runs with seed base_seed + i.
  std::uint64_t seed(int replication) const { return base_seed + static_cast<std::uint64_t>(replication); }
  std::vector<double> rates() const;
};

ExperimentConfig config_from_preset(std::string_view name);

// Keys: "preset" or "network", "arrivals", "policy", "horizon", "warmup",
// "replications", "seed", "checkpoints", "exponent_ladder". Arrivals default
// to the preset's when a preset is named.
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& config);

void validate_config(const ExperimentConfig& config);

// Keeps each flow's size law, rescales file probabilities.
void set_rates(ExperimentConfig& config, const std::vector<double>& rates);
// Zeta-sized files on the given flows, rates unchanged.
void make_heavy(ExperimentConfig& config, const std::vector<int>& flows, double tail_index = 1.5);
// Scales all rates by a common factor so that traffic intensity equals rho.
void scale_to_rho(ExperimentConfig& config, double rho);

// ---- analyze -----------------------------------------------------------------

StabilityReport analyze(const ExperimentConfig& config);
Json report_to_json(const StabilityReport& report);
std::string report_to_text(const StabilityReport& report);

// ---- simulate ----------------------------------------------------------------

struct SimulationResult {
  ExperimentConfig config;
  std::vector<SimStats> replications;  // index i ran with config.seed(i)
  SimStats merged;                     // left fold of replications in index order
};

// Replications run on up to `threads` workers (0: hardware concurrency);
// results do not depend on the thread count.
SimulationResult simulate(const ExperimentConfig& config, unsigned threads = 0);

std::string stats_csv_header(const StatsConfig& stats);
// Rows ordered by (replication, flow), then per-flow "mean" and "stderr" rows.
std::string simulation_csv(const SimulationResult& result);
Json checkpoints_json(const SimulationResult& result);
std::string simulation_summary(const SimulationResult& result);

// ---- sweep -------------------------------------------------------------------

struct SweepSpec {
  enum class Kind { rho, flow_rate } kind = Kind::rho;
  int flow = 0;
  std::vector<double> values;
};

struct SweepPoint {
  double value = 0.0;
  double rho = 0.0;
  SimulationResult result;
  std::vector<Trend> trend;          // per flow; inconclusive when too few checkpoints
  std::optional<double> bernoulli_bound;
  std::optional<double> threshold;   // fluid threshold of the swept flow
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepPoint> points;
};

SweepResult sweep(const ExperimentConfig& config, const SweepSpec& spec, unsigned threads = 0);
std::string sweep_csv(const SweepResult& result);
// Least-squares slope of log(sum_f mean_q) against log(1/(1-rho)).
double loglog_slope(const SweepResult& result);
std::string sweep_summary(const SweepResult& result);

// Sample mean and standard error over replications.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& xs);

}  // namespace mwsched
