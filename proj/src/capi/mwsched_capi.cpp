#include "mwsched/mwsched.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "mwsched/analysis.hpp"
#include "mwsched/error.hpp"
#include "mwsched/experiment.hpp"
#include "mwsched/json_io.hpp"
#include "mwsched/presets.hpp"

struct mws_network {
  mwsched::NetworkSpec spec;
};
struct mws_experiment {
  mwsched::ExperimentConfig config;
};
struct mws_report {
  mwsched::StabilityReport report;
};
struct mws_stats {
  mwsched::SimStats stats;
};
struct mws_simulation {
  mwsched::SimulationResult result;
};
struct mws_sweep {
  mwsched::SweepResult result;
};

namespace {

thread_local std::string last_message;
thread_local int last_flow = -1;

mws_status fail(mws_status status, const char* message, int flow = -1) {
  last_message = message;
  last_flow = flow;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
mws_status guard(F&& body) {
  try {
    body();
    last_message.clear();
    last_flow = -1;
    return MWS_OK;
  } catch (const mwsched::Error& e) {
    return fail(static_cast<mws_status>(e.code()), e.what(), e.flow().value_or(-1));
  } catch (const std::bad_alloc&) {
    return fail(MWS_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MWS_INTERNAL, e.what());
  } catch (...) {
    return fail(MWS_INTERNAL, "unknown error");
  }
}

#define MWS_REQUIRE(cond)                                                        \
  do {                                                                           \
    if (!(cond)) return fail(MWS_INVALID_ARGUMENT, "null or invalid argument: " #cond); \
  } while (0)

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void check_flow(int flow, int num_flows) {
  if (flow < 0 || flow >= num_flows)
    throw mwsched::Error(mwsched::Errc::flow_id_out_of_range, "no flow " + std::to_string(flow), flow);
}

void check_count(size_t n, int num_flows) {
  if (n != static_cast<size_t>(num_flows))
    throw mwsched::Error(mwsched::Errc::invalid_argument,
                         "expected " + std::to_string(num_flows) + " values, got " + std::to_string(n));
}

mws_trend to_c(mwsched::Trend t) {
  switch (t) {
    case mwsched::Trend::converging: return MWS_CONVERGING;
    case mwsched::Trend::diverging: return MWS_DIVERGING;
    case mwsched::Trend::inconclusive: break;
  }
  return MWS_INCONCLUSIVE;
}

}  // namespace

extern "C" {

const char* mws_last_error_message(void) { return last_message.c_str(); }
int mws_last_error_flow(void) { return last_flow; }

const char* mws_status_name(mws_status status) {
  if (status == MWS_OK) return "Ok";
  if (status < MWS_INVALID_ARGUMENT || status > MWS_INTERNAL) return "Unknown";
  return mwsched::errc_name(static_cast<mwsched::Errc>(status));
}

int mws_status_exit_code(mws_status status) {
  switch (status) {
    case MWS_OK: return 0;
    case MWS_INVALID_ARGUMENT:
    case MWS_EMPTY_SCHEDULE:
    case MWS_FLOW_NEVER_SERVED:
    case MWS_FLOW_ID_OUT_OF_RANGE:
    case MWS_TOO_MANY_FLOWS:
    case MWS_UNKNOWN_PRESET:
    case MWS_PRESET_TOO_LARGE:
    case MWS_INVALID_HORIZON:
    case MWS_CONFIG_ERROR:
      return 1;
    default:
      return 2;
  }
}

void mws_string_free(char* s) { std::free(s); }

mws_status mws_preset_names(char** out) {
  MWS_REQUIRE(out);
  return guard([&] {
    std::string s;
    for (const auto& n : mwsched::preset_names()) s += n + "\n";
    *out = dup_string(s);
  });
}

// ---- networks ----

mws_status mws_network_from_preset(const char* name, mws_network** out) {
  MWS_REQUIRE(name && out);
  return guard([&] { *out = new mws_network{mwsched::preset(name).network}; });
}

mws_status mws_network_create(const char* name, int num_flows, const int* flows, const size_t* offsets,
                              size_t num_schedules, mws_network** out) {
  MWS_REQUIRE(out && offsets && (flows || num_schedules == 0));
  return guard([&] {
    mwsched::RawNetwork raw;
    raw.name = name ? name : "custom";
    raw.num_flows = num_flows;
    for (size_t i = 0; i < num_schedules; ++i) {
      if (offsets[i + 1] < offsets[i])
        throw mwsched::Error(mwsched::Errc::invalid_argument, "schedule offsets must be nondecreasing");
      raw.schedules.emplace_back(flows + offsets[i], flows + offsets[i + 1]);
    }
    *out = new mws_network{mwsched::validate_network(raw)};
  });
}

mws_status mws_network_from_json(const char* json, mws_network** out) {
  MWS_REQUIRE(json && out);
  return guard([&] { *out = new mws_network{mwsched::network_from_json(mwsched::parse_json(json))}; });
}

void mws_network_free(mws_network* network) { delete network; }

int mws_network_num_flows(const mws_network* network) { return network ? network->spec.num_flows : 0; }

size_t mws_network_num_schedules(const mws_network* network) {
  return network ? network->spec.schedules.size() : 0;
}

mws_status mws_network_schedule_mask(const mws_network* network, size_t index, uint64_t* out) {
  MWS_REQUIRE(network && out);
  MWS_REQUIRE(index < network->spec.schedules.size());
  *out = network->spec.schedules[index].mask();
  return MWS_OK;
}

mws_status mws_network_conflicts(const mws_network* network, int f, int g, int* out) {
  MWS_REQUIRE(network && out);
  return guard([&] { *out = mwsched::conflicts(network->spec, mwsched::FlowId{f}, mwsched::FlowId{g}) ? 1 : 0; });
}

mws_status mws_network_to_json(const mws_network* network, char** out) {
  MWS_REQUIRE(network && out);
  return guard([&] { *out = dup_string(mwsched::network_to_json(network->spec).dump()); });
}

// ---- analysis ----

mws_status mws_traffic_intensity(const mws_network* network, const double* rates, size_t n, double* rho) {
  MWS_REQUIRE(network && rates && rho);
  return guard([&] {
    check_count(n, network->spec.num_flows);
    *rho = mwsched::traffic_intensity({rates, n}, network->spec);
  });
}

mws_status mws_covering_number(const mws_network* network, int* out) {
  MWS_REQUIRE(network && out);
  return guard([&] { *out = mwsched::covering_number(network->spec); });
}

mws_status mws_s_max(const mws_network* network, int* out) {
  MWS_REQUIRE(network && out);
  return guard([&] { *out = mwsched::s_max(network->spec); });
}

mws_status mws_fluid_solve(const mws_network* network, const double* rates, size_t n, double* mu,
                           double* threshold) {
  MWS_REQUIRE(network && rates);
  return guard([&] {
    check_count(n, network->spec.num_flows);
    const auto sol = mwsched::fluid_solve({rates, n}, network->spec);
    for (size_t f = 0; f < n; ++f) {
      if (mu) mu[f] = sol.mu[f];
      if (threshold) threshold[f] = sol.threshold[f];
    }
  });
}

mws_status mws_compute_H(double rho, int k_star, double alpha, double moment, double* out) {
  MWS_REQUIRE(out);
  return guard([&] { *out = mwsched::compute_H(rho, k_star, alpha, moment); });
}

mws_status mws_bernoulli_bound(double rho, int k_star, int s_max, double* out) {
  MWS_REQUIRE(out);
  return guard([&] { *out = mwsched::bernoulli_bound(rho, k_star, s_max); });
}

mws_status mws_arrival_moment(const char* arrival_json, double m, double* out) {
  MWS_REQUIRE(arrival_json && out);
  return guard([&] { *out = mwsched::moment(mwsched::arrival_from_json(mwsched::parse_json(arrival_json)), m); });
}

// ---- experiments ----

mws_status mws_experiment_from_preset(const char* name, mws_experiment** out) {
  MWS_REQUIRE(name && out);
  return guard([&] { *out = new mws_experiment{mwsched::config_from_preset(name)}; });
}

mws_status mws_experiment_from_json(const char* json, mws_experiment** out) {
  MWS_REQUIRE(json && out);
  return guard([&] { *out = new mws_experiment{mwsched::config_from_json(mwsched::parse_json(json))}; });
}

void mws_experiment_free(mws_experiment* experiment) { delete experiment; }

int mws_experiment_num_flows(const mws_experiment* experiment) {
  return experiment ? experiment->config.network.num_flows : 0;
}

int64_t mws_experiment_horizon(const mws_experiment* experiment) {
  return experiment ? experiment->config.horizon : 0;
}
int mws_experiment_replications(const mws_experiment* experiment) {
  return experiment ? experiment->config.replications : 0;
}
uint64_t mws_experiment_base_seed(const mws_experiment* experiment) {
  return experiment ? experiment->config.base_seed : 0;
}

mws_status mws_experiment_rates(const mws_experiment* experiment, double* out, size_t n) {
  MWS_REQUIRE(experiment && out);
  return guard([&] {
    check_count(n, experiment->config.network.num_flows);
    const auto r = experiment->config.rates();
    std::copy(r.begin(), r.end(), out);
  });
}

mws_status mws_experiment_set_rates(mws_experiment* experiment, const double* rates, size_t n) {
  MWS_REQUIRE(experiment && rates);
  return guard([&] {
    check_count(n, experiment->config.network.num_flows);
    mwsched::set_rates(experiment->config, {rates, rates + n});
  });
}

mws_status mws_experiment_set_heavy(mws_experiment* experiment, const int* flows, size_t n, double tail_index) {
  MWS_REQUIRE(experiment && (flows || n == 0));
  return guard([&] {
    mwsched::ExperimentConfig c = experiment->config;
    mwsched::make_heavy(c, {flows, flows + n}, tail_index);
    for (const auto& a : c.arrivals) mwsched::validate_arrival(a);
    experiment->config = std::move(c);
  });
}

mws_status mws_experiment_scale_to_rho(mws_experiment* experiment, double rho) {
  MWS_REQUIRE(experiment);
  return guard([&] { mwsched::scale_to_rho(experiment->config, rho); });
}

mws_status mws_experiment_set_max_weight(mws_experiment* experiment) {
  MWS_REQUIRE(experiment);
  experiment->config.policy = mwsched::MaxWeight{};
  return MWS_OK;
}

mws_status mws_experiment_set_max_weight_alpha(mws_experiment* experiment, const double* alphas, size_t n) {
  MWS_REQUIRE(experiment && alphas);
  return guard([&] {
    mwsched::PolicySpec p = mwsched::MaxWeightAlpha{{alphas, alphas + n}};
    mwsched::validate_policy(p, experiment->config.network.num_flows);
    experiment->config.policy = std::move(p);
  });
}

mws_status mws_experiment_set_priority(mws_experiment* experiment, const int* order, size_t n) {
  MWS_REQUIRE(experiment && order);
  return guard([&] {
    mwsched::PolicySpec p = mwsched::Priority{{order, order + n}};
    mwsched::validate_policy(p, experiment->config.network.num_flows);
    experiment->config.policy = std::move(p);
  });
}

mws_status mws_experiment_set_horizon(mws_experiment* experiment, int64_t horizon, int64_t warmup) {
  MWS_REQUIRE(experiment);
  return guard([&] {
    mwsched::ExperimentConfig c = experiment->config;
    c.horizon = horizon;
    c.warmup = warmup < 0 ? std::nullopt : std::optional<std::int64_t>(warmup);
    if (c.horizon <= c.effective_warmup())
      throw mwsched::Error(mwsched::Errc::invalid_horizon, "need horizon > warmup >= 0");
    experiment->config = std::move(c);
  });
}

mws_status mws_experiment_set_replications(mws_experiment* experiment, int replications, uint64_t base_seed) {
  MWS_REQUIRE(experiment);
  if (replications < 1) return fail(MWS_CONFIG_ERROR, "replications must be >= 1");
  experiment->config.replications = replications;
  experiment->config.base_seed = base_seed;
  return MWS_OK;
}

mws_status mws_experiment_set_checkpoints(mws_experiment* experiment, const int64_t* slots, size_t n) {
  MWS_REQUIRE(experiment && (slots || n == 0));
  for (size_t i = 0; i < n; ++i)
    if (slots[i] < 1) return fail(MWS_CONFIG_ERROR, "checkpoints must be positive");
  experiment->config.stats.checkpoints.assign(slots, slots + n);
  return MWS_OK;
}

mws_status mws_experiment_set_cycle_start(mws_experiment* experiment, int enabled) {
  MWS_REQUIRE(experiment);
  experiment->config.stats.cycle_start = enabled != 0;
  return MWS_OK;
}

mws_status mws_experiment_to_json(const mws_experiment* experiment, char** out) {
  MWS_REQUIRE(experiment && out);
  return guard([&] { *out = dup_string(mwsched::config_to_json(experiment->config).dump(2)); });
}

// ---- reports ----

mws_status mws_analyze(const mws_experiment* experiment, mws_report** out) {
  MWS_REQUIRE(experiment && out);
  return guard([&] { *out = new mws_report{mwsched::analyze(experiment->config)}; });
}

void mws_report_free(mws_report* report) { delete report; }

mws_status mws_report_to_json(const mws_report* report, char** out) {
  MWS_REQUIRE(report && out);
  return guard([&] { *out = dup_string(mwsched::report_to_json(report->report).dump(2)); });
}

mws_status mws_report_to_text(const mws_report* report, char** out) {
  MWS_REQUIRE(report && out);
  return guard([&] { *out = dup_string(mwsched::report_to_text(report->report)); });
}

double mws_report_rho(const mws_report* report) { return report ? report->report.rho : 0.0; }
int mws_report_k_star(const mws_report* report) { return report ? report->report.k_star : 0; }

mws_status mws_report_flow_class(const mws_report* report, int flow, mws_flow_class* out) {
  MWS_REQUIRE(report && out);
  return guard([&] {
    check_flow(flow, static_cast<int>(report->report.flows.size()));
    *out = static_cast<mws_flow_class>(report->report.flows[flow].cls);
  });
}

mws_status mws_report_moment_bound_total(const mws_report* report, double* out) {
  MWS_REQUIRE(report && out);
  if (!report->report.moment_bound_total) return fail(MWS_NOT_APPLICABLE, report->report.moment_bound_note.c_str());
  *out = *report->report.moment_bound_total;
  return MWS_OK;
}

// ---- simulation ----

mws_status mws_run(const mws_experiment* experiment, uint64_t seed, mws_stats** out) {
  MWS_REQUIRE(experiment && out);
  return guard([&] {
    const auto& c = experiment->config;
    mwsched::validate_config(c);
    *out = new mws_stats{
        mwsched::run(c.network, c.arrivals, c.policy, c.horizon, c.effective_warmup(), seed, c.stats)};
  });
}

mws_status mws_simulate(const mws_experiment* experiment, unsigned threads, mws_simulation** out) {
  MWS_REQUIRE(experiment && out);
  return guard([&] { *out = new mws_simulation{mwsched::simulate(experiment->config, threads)}; });
}

void mws_simulation_free(mws_simulation* simulation) { delete simulation; }

size_t mws_simulation_num_replications(const mws_simulation* simulation) {
  return simulation ? simulation->result.replications.size() : 0;
}

mws_status mws_simulation_replication(const mws_simulation* simulation, size_t index, mws_stats** out) {
  MWS_REQUIRE(simulation && out);
  MWS_REQUIRE(index < simulation->result.replications.size());
  return guard([&] { *out = new mws_stats{simulation->result.replications[index]}; });
}

mws_status mws_simulation_merged(const mws_simulation* simulation, mws_stats** out) {
  MWS_REQUIRE(simulation && out);
  return guard([&] { *out = new mws_stats{simulation->result.merged}; });
}

mws_status mws_simulation_csv(const mws_simulation* simulation, char** out) {
  MWS_REQUIRE(simulation && out);
  return guard([&] { *out = dup_string(mwsched::simulation_csv(simulation->result)); });
}

mws_status mws_simulation_checkpoints_json(const mws_simulation* simulation, char** out) {
  MWS_REQUIRE(simulation && out);
  return guard([&] { *out = dup_string(mwsched::checkpoints_json(simulation->result).dump(2)); });
}

mws_status mws_simulation_summary(const mws_simulation* simulation, char** out) {
  MWS_REQUIRE(simulation && out);
  return guard([&] { *out = dup_string(mwsched::simulation_summary(simulation->result)); });
}

// ---- stats ----

void mws_stats_free(mws_stats* stats) { delete stats; }

mws_status mws_stats_merge(const mws_stats* a, const mws_stats* b, mws_stats** out) {
  MWS_REQUIRE(a && b && out);
  return guard([&] { *out = new mws_stats{mwsched::merge(a->stats, b->stats)}; });
}

int mws_stats_equal(const mws_stats* a, const mws_stats* b) { return a && b && a->stats == b->stats ? 1 : 0; }
uint64_t mws_stats_slots(const mws_stats* stats) { return stats ? stats->stats.slots : 0; }
uint64_t mws_stats_cycles(const mws_stats* stats) { return stats ? stats->stats.cycles : 0; }

mws_status mws_stats_mean_queue(const mws_stats* stats, int flow, double* out) {
  MWS_REQUIRE(stats && out);
  return guard([&] {
    check_flow(flow, stats->stats.num_flows());
    *out = stats->stats.mean_q(flow);
  });
}

mws_status mws_stats_mean_queue_pow(const mws_stats* stats, int flow, size_t index, double* out) {
  MWS_REQUIRE(stats && out);
  return guard([&] {
    check_flow(flow, stats->stats.num_flows());
    if (index >= stats->stats.flows[flow].exponents.size())
      throw mwsched::Error(mwsched::Errc::invalid_argument, "no such exponent");
    *out = stats->stats.mean_q_pow(flow, index);
  });
}

mws_status mws_stats_mean_delay(const mws_stats* stats, int flow, double* out) {
  MWS_REQUIRE(stats && out);
  return guard([&] {
    check_flow(flow, stats->stats.num_flows());
    if (stats->stats.flows[flow].files_completed == 0)
      throw mwsched::Error(mwsched::Errc::no_completed_files, "no file of this flow completed", flow);
    *out = stats->stats.mean_delay(flow);
  });
}

mws_status mws_stats_littles_residual(const mws_stats* stats, int flow, double* out) {
  MWS_REQUIRE(stats && out);
  return guard([&] {
    check_flow(flow, stats->stats.num_flows());
    *out = mwsched::littles_law_residual(stats->stats, mwsched::FlowId{flow});
  });
}

mws_status mws_stats_basta_distance(const mws_stats* stats, int flow, double* out) {
  MWS_REQUIRE(stats && out);
  return guard([&] {
    check_flow(flow, stats->stats.num_flows());
    *out = mwsched::basta_distance(stats->stats, mwsched::FlowId{flow});
  });
}

mws_status mws_stats_diagnostic(const mws_stats* stats, int flow, mws_trend* trend, double* overall) {
  MWS_REQUIRE(stats && trend);
  return guard([&] {
    check_flow(flow, stats->stats.num_flows());
    const auto d = mwsched::divergence_diagnostic(stats->stats, mwsched::FlowId{flow});
    *trend = to_c(d.trend);
    if (overall) *overall = d.overall;
  });
}

// ---- sweeps ----

namespace {

mws_status run_sweep(const mws_experiment* experiment, mwsched::SweepSpec spec, unsigned threads,
                     mws_sweep** out) {
  return guard([&] { *out = new mws_sweep{mwsched::sweep(experiment->config, spec, threads)}; });
}

}  // namespace

mws_status mws_sweep_rho(const mws_experiment* experiment, const double* rhos, size_t n, unsigned threads,
                         mws_sweep** out) {
  MWS_REQUIRE(experiment && rhos && out);
  return run_sweep(experiment, {mwsched::SweepSpec::Kind::rho, 0, {rhos, rhos + n}}, threads, out);
}

mws_status mws_sweep_flow_rate(const mws_experiment* experiment, int flow, const double* rates, size_t n,
                               unsigned threads, mws_sweep** out) {
  MWS_REQUIRE(experiment && rates && out);
  return run_sweep(experiment, {mwsched::SweepSpec::Kind::flow_rate, flow, {rates, rates + n}}, threads, out);
}

void mws_sweep_free(mws_sweep* sweep) { delete sweep; }

size_t mws_sweep_num_points(const mws_sweep* sweep) { return sweep ? sweep->result.points.size() : 0; }

mws_status mws_sweep_point_rho(const mws_sweep* sweep, size_t point, double* out) {
  MWS_REQUIRE(sweep && out);
  MWS_REQUIRE(point < sweep->result.points.size());
  *out = sweep->result.points[point].rho;
  return MWS_OK;
}

mws_status mws_sweep_point_mean_queue(const mws_sweep* sweep, size_t point, int flow, double* out) {
  MWS_REQUIRE(sweep && out);
  MWS_REQUIRE(point < sweep->result.points.size());
  return guard([&] {
    const auto& m = sweep->result.points[point].result.merged;
    check_flow(flow, m.num_flows());
    *out = m.mean_q(flow);
  });
}

mws_status mws_sweep_point_trend(const mws_sweep* sweep, size_t point, int flow, mws_trend* out) {
  MWS_REQUIRE(sweep && out);
  MWS_REQUIRE(point < sweep->result.points.size());
  return guard([&] {
    const auto& p = sweep->result.points[point];
    check_flow(flow, static_cast<int>(p.trend.size()));
    *out = to_c(p.trend[flow]);
  });
}

mws_status mws_sweep_to_csv(const mws_sweep* sweep, char** out) {
  MWS_REQUIRE(sweep && out);
  return guard([&] { *out = dup_string(mwsched::sweep_csv(sweep->result)); });
}

mws_status mws_sweep_summary(const mws_sweep* sweep, char** out) {
  MWS_REQUIRE(sweep && out);
  return guard([&] { *out = dup_string(mwsched::sweep_summary(sweep->result)); });
}

mws_status mws_sweep_loglog_slope(const mws_sweep* sweep, double* out) {
  MWS_REQUIRE(sweep && out);
  return guard([&] { *out = mwsched::loglog_slope(sweep->result); });
}

}  // extern "C"
