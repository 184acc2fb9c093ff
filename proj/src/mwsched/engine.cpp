#include "mwsched/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mwsched/error.hpp"
#include "mwsched/json_io.hpp"

namespace mwsched {

namespace {

double power(std::int64_t q, double e) {
  if (q == 0) return 0.0;
  const auto x = static_cast<double>(q);
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  if (e == 0.5) return std::sqrt(x);
  return std::pow(x, e);
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? std::nan("") : static_cast<double>(num) / static_cast<double>(den);
}

void check_flow(const SimStats& stats, FlowId flow) {
  if (flow.index < 0 || flow.index >= stats.num_flows())
    throw Error(Errc::flow_id_out_of_range, "flow " + std::to_string(flow.index) + " out of range",
                flow.index);
}

template <typename T>
void add_into(std::vector<T>& into, const std::vector<T>& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

}  // namespace

SimState::SimState(int num_flows)
    : queues_(num_flows, 0), files_(num_flows), arrived_(num_flows, 0), served_(num_flows, 0) {}

void SimState::advance(FlowMask served, std::span<const std::int64_t> arrivals) {
  departures_.clear();
  for (FlowMask m = served; m != 0; m &= m - 1) {
    const int f = std::countr_zero(m);
    if (queues_[f] == 0) continue;
    FileRecord& head = files_[f].front();
    --head.remaining;
    --queues_[f];
    ++served_[f];
    if (head.remaining == 0) {
      head.departure_slot = slot_;
      departures_.push_back(head);
      files_[f].pop_front();
    }
  }
  for (int f = 0; f < num_flows(); ++f) {
    const std::int64_t a = arrivals[f];
    if (a <= 0) continue;
    files_[f].push_back(FileRecord{f, slot_, a, a, std::nullopt});
    queues_[f] += a;
    arrived_[f] += static_cast<std::uint64_t>(a);
  }
  ++slot_;
}

bool SimState::consistent() const {
  for (int f = 0; f < num_flows(); ++f) {
    std::int64_t total = 0;
    std::int64_t last_arrival = -1;
    for (const FileRecord& r : files_[f]) {
      if (r.remaining <= 0 || r.remaining > r.size || r.arrival_slot < last_arrival) return false;
      last_arrival = r.arrival_slot;
      total += r.remaining;
    }
    if (total != queues_[f]) return false;
    if (arrived_[f] != served_[f] + static_cast<std::uint64_t>(queues_[f])) return false;
  }
  return true;
}

SimState step(SimState state, const ScheduleDecision& decision,
              std::span<const std::int64_t> arrivals) {
  state.advance(decision.chosen.mask(), arrivals);
  return state;
}

void Histogram::add(std::int64_t value, std::uint64_t count) {
  total_ += count;
  if (value > cap_) {
    overflow_ += count;
    return;
  }
  const auto idx = static_cast<std::size_t>(value);
  if (idx >= counts_.size()) counts_.resize(idx + 1, 0);
  counts_[idx] += count;
}

void Histogram::merge(const Histogram& other) {
  if (other.counts_.size() > counts_.size()) counts_.resize(other.counts_.size(), 0);
  for (std::size_t i = 0; i < other.counts_.size(); ++i) counts_[i] += other.counts_[i];
  overflow_ += other.overflow_;
  total_ += other.total_;
}

double sup_distance(const Histogram& a, const Histogram& b) {
  if (a.total() == 0 || b.total() == 0)
    throw Error(Errc::empty_histogram, "distance needs two nonempty histograms");
  const std::size_t n = std::max(a.counts().size(), b.counts().size());
  const auto ta = static_cast<double>(a.total());
  const auto tb = static_cast<double>(b.total());
  std::uint64_t ca = 0;
  std::uint64_t cb = 0;
  double sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < a.counts().size()) ca += a.counts()[i];
    if (i < b.counts().size()) cb += b.counts()[i];
    sup = std::max(sup, std::abs(static_cast<double>(ca) / ta - static_cast<double>(cb) / tb));
  }
  return sup;
}

double SimStats::mean_q(int flow) const { return ratio(flows[flow].sum_q, slots); }

double SimStats::mean_q_pow(int flow, std::size_t exponent_index) const {
  return slots == 0 ? std::nan("") : flows[flow].sum_q_pow[exponent_index] / static_cast<double>(slots);
}

double SimStats::mean_trunc_q(int flow, std::size_t truncation_index) const {
  return ratio(flows[flow].sum_trunc_q[truncation_index], slots);
}

double SimStats::mean_delay(int flow) const {
  return ratio(flows[flow].sum_delay, flows[flow].files_completed);
}

double SimStats::mean_trunc_delay(int flow, std::size_t truncation_index) const {
  return ratio(flows[flow].sum_trunc_delay[truncation_index], flows[flow].files_completed);
}

double SimStats::mean_files_in_system(int flow) const {
  return ratio(flows[flow].sum_files_in_system, slots);
}

double SimStats::file_rate(int flow) const { return ratio(flows[flow].files_arrived, slots); }

double SimStats::mean_cycle_length() const { return ratio(sum_cycle_length, cycles); }

SimStats merge(const SimStats& a, const SimStats& b) {
  if (b.empty()) return a;
  if (a.empty()) return b;
  if (a.fingerprint != b.fingerprint)
    throw Error(Errc::config_mismatch, "cannot merge statistics of different configurations");
  SimStats out = a;
  out.slots += b.slots;
  for (std::size_t f = 0; f < out.flows.size(); ++f) {
    FlowStats& x = out.flows[f];
    const FlowStats& y = b.flows[f];
    add_into(x.sum_q_pow, y.sum_q_pow);
    x.sum_q += y.sum_q;
    add_into(x.sum_trunc_q, y.sum_trunc_q);
    x.sum_files_in_system += y.sum_files_in_system;
    x.files_arrived += y.files_arrived;
    x.files_completed += y.files_completed;
    x.sum_delay += y.sum_delay;
    add_into(x.sum_trunc_delay, y.sum_trunc_delay);
    x.queue_hist.merge(y.queue_hist);
    x.arrival_hist.merge(y.arrival_hist);
  }
  out.checkpoints.insert(out.checkpoints.end(), b.checkpoints.begin(), b.checkpoints.end());
  // Total order, so merging is commutative even with repeated tags.
  std::sort(out.checkpoints.begin(), out.checkpoints.end(), [](const Checkpoint& l, const Checkpoint& r) {
    return std::tie(l.replication, l.slot, l.mean_q) < std::tie(r.replication, r.slot, r.mean_q);
  });
  out.cycles += b.cycles;
  out.sum_cycle_length += b.sum_cycle_length;
  out.sum_cycle_length_sq += b.sum_cycle_length_sq;
  return out;
}

double littles_law_residual(const SimStats& stats, FlowId flow) {
  check_flow(stats, flow);
  const FlowStats& fs = stats.flows[flow.index];
  if (fs.files_completed == 0 || stats.slots == 0)
    throw Error(Errc::no_completed_files, "flow " + std::to_string(flow.index) + " completed no files",
                flow.index);
  const double l = stats.mean_files_in_system(flow.index);
  const double pd = stats.file_rate(flow.index) * stats.mean_delay(flow.index);
  return std::abs(l - pd) / std::max(l, 1e-9);
}

double basta_distance(const SimStats& stats, FlowId flow) {
  check_flow(stats, flow);
  const FlowStats& fs = stats.flows[flow.index];
  return sup_distance(fs.queue_hist, fs.arrival_hist);
}

const char* trend_name(Trend t) {
  switch (t) {
    case Trend::converging: return "Converging";
    case Trend::diverging: return "Diverging";
    case Trend::inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

Diagnostic divergence_diagnostic(const SimStats& stats, FlowId flow) {
  check_flow(stats, flow);
  std::map<std::int64_t, std::pair<double, int>> by_slot;
  for (const Checkpoint& c : stats.checkpoints) {
    auto& [sum, n] = by_slot[c.slot];
    sum += c.mean_q[flow.index];
    ++n;
  }
  if (by_slot.size() < 3)
    throw Error(Errc::too_few_checkpoints, "divergence diagnostic needs at least 3 checkpoints");

  Diagnostic d;
  for (const auto& [slot, acc] : by_slot) {
    d.slots.push_back(slot);
    d.means.push_back(acc.first / acc.second);
  }
  auto quotient = [](double num, double den) {
    if (den > 0.0) return num / den;
    return num > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  };
  for (std::size_t i = 0; i + 1 < d.means.size(); ++i)
    d.ratios.push_back(quotient(d.means[i + 1], d.means[i]));
  d.overall = quotient(d.means.back(), d.means.front());

  const bool growing =
      std::all_of(d.ratios.begin(), d.ratios.end(), [](double r) { return r >= 1.5; });
  const bool flat =
      std::all_of(d.ratios.begin(), d.ratios.end(), [](double r) { return std::abs(r - 1.0) <= 0.1; });
  if (growing && d.overall >= 4.0)
    d.trend = Trend::diverging;
  else if (flat)
    d.trend = Trend::converging;
  return d;
}

Simulation::Simulation(NetworkSpec network, std::vector<ArrivalSpec> arrivals, PolicySpec policy,
                       StatsConfig config)
    : network_(validate_network(network)),
      arrivals_(std::move(arrivals)),
      policy_(std::move(policy)),
      config_(std::move(config)) {
  if (static_cast<int>(arrivals_.size()) != network_.num_flows)
    throw Error(Errc::invalid_argument, "need one arrival spec per flow");
  validate_policy(policy_, network_.num_flows);
  for (std::int64_t m : config_.truncations)
    if (m <= 0) throw Error(Errc::invalid_argument, "truncation levels must be positive");
  if (config_.histogram_cap < 0) throw Error(Errc::invalid_argument, "histogram cap must be >= 0");
  std::sort(config_.checkpoints.begin(), config_.checkpoints.end());
  config_.checkpoints.erase(std::unique(config_.checkpoints.begin(), config_.checkpoints.end()),
                            config_.checkpoints.end());
  samplers_.reserve(arrivals_.size());
  for (const ArrivalSpec& a : arrivals_) samplers_.emplace_back(a);
}

SimStats Simulation::run(std::int64_t horizon, std::int64_t warmup, std::uint64_t seed) const {
  if (warmup < 0 || horizon <= warmup)
    throw Error(Errc::invalid_horizon, "need horizon > warmup >= 0");

  const int nf = network_.num_flows;
  const auto exponents = policy_exponents(policy_, nf);
  const auto& truncs = config_.truncations;

  SimStats stats;
  {
    Json fp = {{"network", network_to_json(network_)},
               {"policy", policy_to_json(policy_)},
               {"horizon", horizon},
               {"warmup", warmup},
               {"truncations", truncs},
               {"exponent_ladder", config_.exponent_ladder},
               {"histogram_cap", config_.histogram_cap},
               {"checkpoints", config_.checkpoints},
               {"cycle_start", config_.cycle_start}};
    for (const ArrivalSpec& a : arrivals_) fp["arrivals"].push_back(arrival_to_json(a));
    stats.fingerprint = fp.dump();
  }
  stats.truncations = truncs;
  stats.flows.resize(nf);
  for (int f = 0; f < nf; ++f) {
    FlowStats& fs = stats.flows[f];
    fs.exponents.push_back(exponents[f]);
    fs.exponents.insert(fs.exponents.end(), config_.exponent_ladder.begin(),
                        config_.exponent_ladder.end());
    fs.sum_q_pow.assign(fs.exponents.size(), 0.0);
    fs.sum_trunc_q.assign(truncs.size(), 0);
    fs.sum_trunc_delay.assign(truncs.size(), 0);
    fs.queue_hist = Histogram(config_.histogram_cap);
    fs.arrival_hist = Histogram(config_.histogram_cap);
  }

  Scheduler scheduler(policy_, network_);
  Rng schedule_rng(seed, 0);
  std::vector<Rng> arrival_rng;
  arrival_rng.reserve(nf);
  for (int f = 0; f < nf; ++f) arrival_rng.emplace_back(seed, static_cast<std::uint64_t>(f) + 1);

  SimState state(nf);
  std::vector<std::int64_t> arrivals(nf, 0);
  std::vector<std::uint64_t> running_sum(nf, 0);
  auto next_checkpoint = config_.checkpoints.begin();
  std::int64_t last_epoch = -1;
  bool started = !config_.cycle_start;

  for (std::int64_t t = 0; t < horizon; ++t) {
    const auto q = state.queues();
    std::int64_t total = 0;
    for (int f = 0; f < nf; ++f) {
      running_sum[f] += static_cast<std::uint64_t>(q[f]);
      total += q[f];
    }
    if (t >= warmup && total == 0) started = true;
    const bool collecting = t >= warmup && started;
    if (collecting) {
      ++stats.slots;
      for (int f = 0; f < nf; ++f) {
        FlowStats& fs = stats.flows[f];
        fs.sum_q += static_cast<std::uint64_t>(q[f]);
        for (std::size_t i = 0; i < fs.exponents.size(); ++i) fs.sum_q_pow[i] += power(q[f], fs.exponents[i]);
        for (std::size_t i = 0; i < truncs.size(); ++i)
          fs.sum_trunc_q[i] += static_cast<std::uint64_t>(std::min(q[f], truncs[i]));
        fs.sum_files_in_system += static_cast<std::uint64_t>(state.files_in_system(f));
        fs.queue_hist.add(q[f]);
      }
      // All queues empty at a slot start: a regeneration epoch.
      if (total == 0) {
        if (last_epoch >= 0) {
          const auto len = static_cast<std::uint64_t>(t - last_epoch);
          ++stats.cycles;
          stats.sum_cycle_length += len;
          stats.sum_cycle_length_sq += static_cast<double>(len) * static_cast<double>(len);
        }
        last_epoch = t;
      }
    }

    const ScheduleDecision decision = scheduler.decide(q, schedule_rng);
    for (int f = 0; f < nf; ++f) {
      arrivals[f] = samplers_[f].sample(arrival_rng[f]);
      if (collecting && arrivals[f] > 0) {
        ++stats.flows[f].files_arrived;
        stats.flows[f].arrival_hist.add(q[f]);
      }
    }
    state.advance(decision.chosen.mask(), arrivals);

    if (collecting) {
      for (const FileRecord& r : state.departures()) {
        FlowStats& fs = stats.flows[r.flow];
        const std::int64_t d = r.delay();
        ++fs.files_completed;
        fs.sum_delay += static_cast<std::uint64_t>(d);
        for (std::size_t i = 0; i < truncs.size(); ++i)
          fs.sum_trunc_delay[i] += static_cast<std::uint64_t>(std::min(d, truncs[i]));
      }
    }

    while (next_checkpoint != config_.checkpoints.end() && *next_checkpoint <= t + 1) {
      if (*next_checkpoint == t + 1) {
        if (!state.consistent())
          throw Error(Errc::internal, "queue counters disagree with file lists");
        Checkpoint c{seed, t + 1, std::vector<double>(nf)};
        for (int f = 0; f < nf; ++f)
          c.mean_q[f] = static_cast<double>(running_sum[f]) / static_cast<double>(t + 1);
        stats.checkpoints.push_back(std::move(c));
      }
      ++next_checkpoint;
    }
  }
  return stats;
}

SimStats run(const NetworkSpec& network, const std::vector<ArrivalSpec>& arrivals,
             const PolicySpec& policy, std::int64_t horizon, std::int64_t warmup,
             std::uint64_t seed, const StatsConfig& config) {
  return Simulation(network, arrivals, policy, config).run(horizon, warmup, seed);
}

std::int64_t default_warmup(std::int64_t horizon) {
  const std::int64_t w = std::max<std::int64_t>(10'000, horizon / 100);
  return w < horizon ? w : horizon / 10;
}

}  // namespace mwsched
