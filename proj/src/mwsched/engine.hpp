#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mwsched/arrivals.hpp"
#include "mwsched/model.hpp"
#include "mwsched/scheduling.hpp"

namespace mwsched {

// One slot's batch of packets on one flow.
struct FileRecord {
  int flow = 0;
  std::int64_t arrival_slot = 0;  // the file arrives at the end of this slot
  std::int64_t size = 1;
  std::int64_t remaining = 1;
  std::optional<std::int64_t> departure_slot;  // slot its last packet is served

  std::int64_t delay() const { return departure_slot.value() - arrival_slot; }

  friend bool operator==(const FileRecord&, const FileRecord&) = default;
};

// Queue lengths Q(t) at the start of slot t plus the FCFS file lists behind
// them.
class SimState {
 public:
  explicit SimState(int num_flows);

  std::int64_t slot() const { return slot_; }
  int num_flows() const { return static_cast<int>(queues_.size()); }
  std::span<const std::int64_t> queues() const { return queues_; }
  std::int64_t queue(int flow) const { return queues_[flow]; }
  const std::deque<FileRecord>& files(int flow) const { return files_[flow]; }
  std::int64_t files_in_system(int flow) const {
    return static_cast<std::int64_t>(files_[flow].size());
  }
  std::uint64_t packets_arrived(int flow) const { return arrived_[flow]; }
  std::uint64_t packets_served(int flow) const { return served_[flow]; }

  // Files whose last packet left during the most recent advance().
  std::span<const FileRecord> departures() const { return departures_; }

  // Slot t: serve the head file of every scheduled nonempty queue, then
  // append this slot's arrivals as new files, then move to t+1.
  void advance(FlowMask served, std::span<const std::int64_t> arrivals);

  // Q_f equals the remaining packets of flow f's files, in FIFO arrival order.
  bool consistent() const;

 private:
  std::int64_t slot_ = 0;
  std::vector<std::int64_t> queues_;
  std::vector<std::deque<FileRecord>> files_;
  std::vector<std::uint64_t> arrived_;
  std::vector<std::uint64_t> served_;
  std::vector<FileRecord> departures_;
};

// Value-semantics form of SimState::advance.
SimState step(SimState state, const ScheduleDecision& decision,
              std::span<const std::int64_t> arrivals);

// Counts of nonnegative integers up to `cap`; larger values land in overflow.
class Histogram {
 public:
  explicit Histogram(std::int64_t cap = 1'000'000) : cap_(cap) {}

  void add(std::int64_t value, std::uint64_t count = 1);
  void merge(const Histogram& other);

  std::uint64_t total() const { return total_; }
  std::int64_t cap() const { return cap_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t overflow() const { return overflow_; }

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  std::int64_t cap_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t overflow_ = 0;
  std::uint64_t total_ = 0;
};

// Sup-norm distance between the two empirical CDFs.
double sup_distance(const Histogram& a, const Histogram& b);

struct StatsConfig {
  // Moments E[Q^e] tracked in addition to the policy exponent.
  std::vector<double> exponent_ladder;
  std::vector<std::int64_t> truncations{10, 100, 1'000, 10'000, 100'000};
  std::int64_t histogram_cap = 1'000'000;
  // Absolute slots at which the running mean of Q over [0, slot) is recorded.
  std::vector<std::int64_t> checkpoints{10'000, 100'000, 1'000'000, 10'000'000};
  // Start collecting at the first all-empty slot at or after the warmup,
  // dropping the partial cycle in progress.
  bool cycle_start = false;

  friend bool operator==(const StatsConfig&, const StatsConfig&) = default;
};

struct FlowStats {
  std::vector<double> exponents;  // [0] is the policy exponent
  std::vector<double> sum_q_pow;
  std::uint64_t sum_q = 0;
  std::vector<std::uint64_t> sum_trunc_q;
  std::uint64_t sum_files_in_system = 0;
  std::uint64_t files_arrived = 0;
  std::uint64_t files_completed = 0;
  std::uint64_t sum_delay = 0;
  std::vector<std::uint64_t> sum_trunc_delay;
  Histogram queue_hist;    // Q_f(t) over collected slots
  Histogram arrival_hist;  // Q_f(t) at slots where a file arrives to f

  friend bool operator==(const FlowStats&, const FlowStats&) = default;
};

struct Checkpoint {
  std::uint64_t replication = 0;  // the replication's seed
  std::int64_t slot = 0;
  std::vector<double> mean_q;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Accumulators over the collected slots [warmup, horizon). Everything except
// the checkpoints is a plain sum, so merging replications is addition.
struct SimStats {
  std::string fingerprint;
  std::vector<std::int64_t> truncations;
  std::uint64_t slots = 0;
  std::vector<FlowStats> flows;
  std::vector<Checkpoint> checkpoints;  // sorted by (replication, slot)
  std::uint64_t cycles = 0;
  std::uint64_t sum_cycle_length = 0;
  double sum_cycle_length_sq = 0.0;

  bool empty() const { return flows.empty() && slots == 0; }
  int num_flows() const { return static_cast<int>(flows.size()); }

  double mean_q(int flow) const;
  double mean_q_pow(int flow, std::size_t exponent_index = 0) const;
  double mean_trunc_q(int flow, std::size_t truncation_index) const;
  double mean_delay(int flow) const;
  double mean_trunc_delay(int flow, std::size_t truncation_index) const;
  double mean_files_in_system(int flow) const;
  double file_rate(int flow) const;  // p-hat: file arrivals per slot
  double mean_cycle_length() const;

  friend bool operator==(const SimStats&, const SimStats&) = default;
};

// Throws ConfigMismatch unless fingerprints agree; an empty SimStats is the
// identity.
SimStats merge(const SimStats& a, const SimStats& b);

// |L - p D| / max(L, 1e-9), the relative Little's-law gap for one flow.
double littles_law_residual(const SimStats& stats, FlowId flow);

// Time-average versus arrival-seen distribution of Q_f.
double basta_distance(const SimStats& stats, FlowId flow);

enum class Trend { converging, diverging, inconclusive };

const char* trend_name(Trend t);

struct Diagnostic {
  Trend trend = Trend::inconclusive;
  std::vector<std::int64_t> slots;
  std::vector<double> means;   // running mean per checkpoint slot
  std::vector<double> ratios;  // means[i+1] / means[i]
  double overall = 1.0;        // means.back() / means.front()
};

// Checkpoints of several replications are averaged slot by slot. Diverging:
// every ratio >= 1.5 and overall >= 4. Converging: every ratio within 0.1 of 1.
Diagnostic divergence_diagnostic(const SimStats& stats, FlowId flow);

// A network/traffic/policy combination ready to be run many times; samplers
// and scheduler set-up are shared by all replications.
class Simulation {
 public:
  Simulation(NetworkSpec network, std::vector<ArrivalSpec> arrivals, PolicySpec policy,
             StatsConfig config = {});

  // Slots [0, horizon); statistics over [warmup, horizon). Deterministic in
  // the seed.
  SimStats run(std::int64_t horizon, std::int64_t warmup, std::uint64_t seed) const;

  const NetworkSpec& network() const { return network_; }
  const std::vector<ArrivalSpec>& arrivals() const { return arrivals_; }
  const PolicySpec& policy() const { return policy_; }
  const StatsConfig& config() const { return config_; }

 private:
  NetworkSpec network_;
  std::vector<ArrivalSpec> arrivals_;
  PolicySpec policy_;
  StatsConfig config_;
  std::vector<ArrivalSampler> samplers_;
};

SimStats run(const NetworkSpec& network, const std::vector<ArrivalSpec>& arrivals,
             const PolicySpec& policy, std::int64_t horizon, std::int64_t warmup,
             std::uint64_t seed, const StatsConfig& config = {});

// max(10^4, horizon/100), or horizon/10 when that would swallow the run.
std::int64_t default_warmup(std::int64_t horizon);

}  // namespace mwsched
