#ifndef MWSCHED_MWSCHED_H
#define MWSCHED_MWSCHED_H

#include <stddef.h>
#include <stdint.h>

#if defined(MWS_BUILDING)
#define MWS_API __attribute__((visibility("default")))
#else
#define MWS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mws_status {
  MWS_OK = 0,
  MWS_INVALID_ARGUMENT = 1,
  MWS_EMPTY_SCHEDULE = 2,
  MWS_FLOW_NEVER_SERVED = 3,
  MWS_FLOW_ID_OUT_OF_RANGE = 4,
  MWS_TOO_MANY_FLOWS = 5,
  MWS_UNKNOWN_PRESET = 6,
  MWS_PRESET_TOO_LARGE = 7,
  MWS_INVALID_HORIZON = 8,
  MWS_CONFIG_MISMATCH = 9,
  MWS_NO_COMPLETED_FILES = 10,
  MWS_EMPTY_HISTOGRAM = 11,
  MWS_TOO_FEW_CHECKPOINTS = 12,
  MWS_INSTANCE_TOO_LARGE = 13,
  MWS_NOT_APPLICABLE = 14,
  MWS_SINGULAR_SYSTEM = 15,
  MWS_INFINITE_MOMENT = 16,
  MWS_RHO_NOT_ADMISSIBLE = 17,
  MWS_CONFIG_ERROR = 18,
  MWS_IO_ERROR = 19,
  MWS_INTERNAL = 20
} mws_status;

typedef enum mws_trend { MWS_CONVERGING = 0, MWS_DIVERGING = 1, MWS_INCONCLUSIVE = 2 } mws_trend;

typedef enum mws_flow_class {
  MWS_HEAVY_TAIL_UNSTABLE = 0,
  MWS_CONFLICT_UNSTABLE = 1,
  MWS_RATE_UNSTABLE = 2,
  MWS_UNDETERMINED = 3
} mws_flow_class;

typedef struct mws_network mws_network;
typedef struct mws_experiment mws_experiment;
typedef struct mws_report mws_report;
typedef struct mws_stats mws_stats;
typedef struct mws_simulation mws_simulation;
typedef struct mws_sweep mws_sweep;

/* Errors. The message and flow refer to the last failing call on this thread. */
MWS_API const char* mws_last_error_message(void);
MWS_API int mws_last_error_flow(void); /* -1 when no flow is involved */
MWS_API const char* mws_status_name(mws_status status);
/* 0 for MWS_OK, 1 for configuration errors, 2 for runtime errors. */
MWS_API int mws_status_exit_code(mws_status status);
/* Strings handed out through char** parameters are released with this. */
MWS_API void mws_string_free(char* s);
/* Newline-separated preset names. */
MWS_API mws_status mws_preset_names(char** out);

/* Networks. */
MWS_API mws_status mws_network_from_preset(const char* name, mws_network** out);
/* Schedule i is flows[offsets[i] .. offsets[i+1]), offsets has num_schedules+1 entries. */
MWS_API mws_status mws_network_create(const char* name, int num_flows, const int* flows, const size_t* offsets,
                                      size_t num_schedules, mws_network** out);
MWS_API mws_status mws_network_from_json(const char* json, mws_network** out);
MWS_API void mws_network_free(mws_network* network);
MWS_API int mws_network_num_flows(const mws_network* network);
MWS_API size_t mws_network_num_schedules(const mws_network* network);
MWS_API mws_status mws_network_schedule_mask(const mws_network* network, size_t index, uint64_t* out);
MWS_API mws_status mws_network_conflicts(const mws_network* network, int f, int g, int* out);
MWS_API mws_status mws_network_to_json(const mws_network* network, char** out);

/* Analysis. Array arguments have one entry per flow. */
MWS_API mws_status mws_traffic_intensity(const mws_network* network, const double* rates, size_t n, double* rho);
MWS_API mws_status mws_covering_number(const mws_network* network, int* out);
MWS_API mws_status mws_s_max(const mws_network* network, int* out);
/* mu and threshold may be NULL. */
MWS_API mws_status mws_fluid_solve(const mws_network* network, const double* rates, size_t n, double* mu,
                                   double* threshold);
MWS_API mws_status mws_compute_H(double rho, int k_star, double alpha, double moment, double* out);
MWS_API mws_status mws_bernoulli_bound(double rho, int k_star, int s_max, double* out);
/* E[A^m] for an arrival law given as JSON, e.g. {"file_prob":0.1,"size":{"kind":"zeta","tail_index":1.5}}. */
MWS_API mws_status mws_arrival_moment(const char* arrival_json, double m, double* out);

/* Experiments: network, arrivals, policy, horizon and replication settings. */
MWS_API mws_status mws_experiment_from_preset(const char* name, mws_experiment** out);
MWS_API mws_status mws_experiment_from_json(const char* json, mws_experiment** out);
MWS_API void mws_experiment_free(mws_experiment* experiment);
MWS_API int mws_experiment_num_flows(const mws_experiment* experiment);
MWS_API int64_t mws_experiment_horizon(const mws_experiment* experiment);
MWS_API int mws_experiment_replications(const mws_experiment* experiment);
MWS_API uint64_t mws_experiment_base_seed(const mws_experiment* experiment);
MWS_API mws_status mws_experiment_rates(const mws_experiment* experiment, double* out, size_t n);
MWS_API mws_status mws_experiment_set_rates(mws_experiment* experiment, const double* rates, size_t n);
MWS_API mws_status mws_experiment_set_heavy(mws_experiment* experiment, const int* flows, size_t n,
                                            double tail_index);
MWS_API mws_status mws_experiment_scale_to_rho(mws_experiment* experiment, double rho);
MWS_API mws_status mws_experiment_set_max_weight(mws_experiment* experiment);
MWS_API mws_status mws_experiment_set_max_weight_alpha(mws_experiment* experiment, const double* alphas, size_t n);
MWS_API mws_status mws_experiment_set_priority(mws_experiment* experiment, const int* order, size_t n);
/* warmup < 0 selects the default warmup. */
MWS_API mws_status mws_experiment_set_horizon(mws_experiment* experiment, int64_t horizon, int64_t warmup);
MWS_API mws_status mws_experiment_set_replications(mws_experiment* experiment, int replications,
                                                   uint64_t base_seed);
MWS_API mws_status mws_experiment_set_checkpoints(mws_experiment* experiment, const int64_t* slots, size_t n);
/* Nonzero: statistics start at the first all-empty slot after the warmup. */
MWS_API mws_status mws_experiment_set_cycle_start(mws_experiment* experiment, int enabled);
MWS_API mws_status mws_experiment_to_json(const mws_experiment* experiment, char** out);

/* Stability report. */
MWS_API mws_status mws_analyze(const mws_experiment* experiment, mws_report** out);
MWS_API void mws_report_free(mws_report* report);
MWS_API mws_status mws_report_to_json(const mws_report* report, char** out);
MWS_API mws_status mws_report_to_text(const mws_report* report, char** out);
MWS_API double mws_report_rho(const mws_report* report);
MWS_API int mws_report_k_star(const mws_report* report);
MWS_API mws_status mws_report_flow_class(const mws_report* report, int flow, mws_flow_class* out);
/* MWS_NOT_APPLICABLE when no finite total exists. */
MWS_API mws_status mws_report_moment_bound_total(const mws_report* report, double* out);

/* Simulation. mws_run performs one replication with the given seed. */
MWS_API mws_status mws_run(const mws_experiment* experiment, uint64_t seed, mws_stats** out);
/* threads == 0 uses the hardware concurrency; results do not depend on it. */
MWS_API mws_status mws_simulate(const mws_experiment* experiment, unsigned threads, mws_simulation** out);
MWS_API void mws_simulation_free(mws_simulation* simulation);
MWS_API size_t mws_simulation_num_replications(const mws_simulation* simulation);
MWS_API mws_status mws_simulation_replication(const mws_simulation* simulation, size_t index, mws_stats** out);
MWS_API mws_status mws_simulation_merged(const mws_simulation* simulation, mws_stats** out);
MWS_API mws_status mws_simulation_csv(const mws_simulation* simulation, char** out);
MWS_API mws_status mws_simulation_checkpoints_json(const mws_simulation* simulation, char** out);
MWS_API mws_status mws_simulation_summary(const mws_simulation* simulation, char** out);

/* Statistics of one or more merged replications. */
MWS_API void mws_stats_free(mws_stats* stats);
MWS_API mws_status mws_stats_merge(const mws_stats* a, const mws_stats* b, mws_stats** out);
MWS_API int mws_stats_equal(const mws_stats* a, const mws_stats* b);
MWS_API uint64_t mws_stats_slots(const mws_stats* stats);
MWS_API uint64_t mws_stats_cycles(const mws_stats* stats);
MWS_API mws_status mws_stats_mean_queue(const mws_stats* stats, int flow, double* out);
/* E[Q^e] for the policy exponent (index 0) or a ladder exponent (index 1..). */
MWS_API mws_status mws_stats_mean_queue_pow(const mws_stats* stats, int flow, size_t index, double* out);
MWS_API mws_status mws_stats_mean_delay(const mws_stats* stats, int flow, double* out);
MWS_API mws_status mws_stats_littles_residual(const mws_stats* stats, int flow, double* out);
MWS_API mws_status mws_stats_basta_distance(const mws_stats* stats, int flow, double* out);
/* overall may be NULL. */
MWS_API mws_status mws_stats_diagnostic(const mws_stats* stats, int flow, mws_trend* trend, double* overall);

/* Sweeps. */
MWS_API mws_status mws_sweep_rho(const mws_experiment* experiment, const double* rhos, size_t n, unsigned threads,
                                 mws_sweep** out);
MWS_API mws_status mws_sweep_flow_rate(const mws_experiment* experiment, int flow, const double* rates, size_t n,
                                       unsigned threads, mws_sweep** out);
MWS_API void mws_sweep_free(mws_sweep* sweep);
MWS_API size_t mws_sweep_num_points(const mws_sweep* sweep);
MWS_API mws_status mws_sweep_point_rho(const mws_sweep* sweep, size_t point, double* out);
MWS_API mws_status mws_sweep_point_mean_queue(const mws_sweep* sweep, size_t point, int flow, double* out);
MWS_API mws_status mws_sweep_point_trend(const mws_sweep* sweep, size_t point, int flow, mws_trend* out);
MWS_API mws_status mws_sweep_to_csv(const mws_sweep* sweep, char** out);
MWS_API mws_status mws_sweep_summary(const mws_sweep* sweep, char** out);
MWS_API mws_status mws_sweep_loglog_slope(const mws_sweep* sweep, double* out);

#ifdef __cplusplus
}
#endif

#endif
