#include "mwsched/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mwsched/error.hpp"

namespace mwsched {

namespace {

constexpr double kTieTolerance = 1e-12;

double power(std::int64_t q, double alpha) {
  if (q == 0) return 0.0;
  if (alpha == 1.0) return static_cast<double>(q);
  return std::pow(static_cast<double>(q), alpha);
}

}  // namespace

void validate_policy(const PolicySpec& policy, int num_flows) {
  if (const auto* a = std::get_if<MaxWeightAlpha>(&policy)) {
    if (static_cast<int>(a->alphas.size()) != num_flows)
      throw Error(Errc::invalid_argument, "max_weight_alpha needs one exponent per flow");
    for (double x : a->alphas)
      if (!(x > 0.0) || !std::isfinite(x))
        throw Error(Errc::invalid_argument, "alpha exponents must be positive and finite");
  } else if (const auto* p = std::get_if<Priority>(&policy)) {
    if (static_cast<int>(p->order.size()) != num_flows)
      throw Error(Errc::invalid_argument, "priority order must list every flow once");
    std::vector<bool> seen(num_flows, false);
    for (int f : p->order) {
      if (f < 0 || f >= num_flows)
        throw Error(Errc::flow_id_out_of_range, "priority order names flow " + std::to_string(f), f);
      if (seen[f]) throw Error(Errc::invalid_argument, "priority order repeats a flow");
      seen[f] = true;
    }
  }
}

std::vector<double> policy_exponents(const PolicySpec& policy, int num_flows) {
  if (const auto* a = std::get_if<MaxWeightAlpha>(&policy)) return a->alphas;
  return std::vector<double>(num_flows, 1.0);
}

bool acts_as_max_weight(const PolicySpec& policy) {
  if (std::holds_alternative<MaxWeight>(policy)) return true;
  if (const auto* a = std::get_if<MaxWeightAlpha>(&policy))
    return std::all_of(a->alphas.begin(), a->alphas.end(), [](double x) { return x == 1.0; });
  return false;
}

const char* policy_name(const PolicySpec& policy) {
  switch (policy.index()) {
    case 0: return "max_weight";
    case 1: return "max_weight_alpha";
    default: return "priority";
  }
}

double weight(std::span<const std::int64_t> queues, Schedule s, std::span<const double> alphas) {
  double w = 0.0;
  for (int f : s.members()) w += power(queues[f], alphas.empty() ? 1.0 : alphas[f]);
  return w;
}

Scheduler::Scheduler(const PolicySpec& policy, const NetworkSpec& network) : network_(&network) {
  validate_policy(policy, network.num_flows);
  if (acts_as_max_weight(policy)) {
    kind_ = Kind::max_weight;
  } else if (const auto* a = std::get_if<MaxWeightAlpha>(&policy)) {
    kind_ = Kind::alpha;
    alphas_ = a->alphas;
    powered_.resize(network.num_flows);
  } else {
    kind_ = Kind::priority;
    const auto& order = std::get<Priority>(policy).order;
    rank_.resize(network.num_flows);
    for (std::size_t r = 0; r < order.size(); ++r) rank_[order[r]] = static_cast<int>(r);
  }
}

// Reservoir sampling over the maximizers: the i-th tie replaces the incumbent
// with probability 1/i, which leaves each maximizer equally likely.
template <typename Weight>
ScheduleDecision Scheduler::argmax(Weight&& w, Rng& rng) const {
  const auto& schedules = network_->schedules;
  auto best = w(schedules[0]);
  std::size_t best_index = 0;
  std::uint64_t ties = 1;
  for (std::size_t i = 1; i < schedules.size(); ++i) {
    const auto x = w(schedules[i]);
    bool greater = false;
    bool equal = false;
    if constexpr (std::is_floating_point_v<decltype(x)>) {
      const double scale = std::max(std::abs(x), std::abs(best));
      equal = std::abs(x - best) <= kTieTolerance * scale;
      greater = !equal && x > best;
    } else {
      equal = x == best;
      greater = x > best;
    }
    if (greater) {
      best = x;
      best_index = i;
      ties = 1;
    } else if (equal) {
      ++ties;
      if (rng.below(ties) == 0) best_index = i;
    }
  }
  return {schedules[best_index], best_index};
}

ScheduleDecision Scheduler::decide(std::span<const std::int64_t> queues, Rng& rng) {
  switch (kind_) {
    case Kind::max_weight:
      return argmax(
          [&](Schedule s) {
            std::int64_t sum = 0;
            for (FlowMask m = s.mask(); m != 0; m &= m - 1) sum += queues[std::countr_zero(m)];
            return sum;
          },
          rng);
    case Kind::alpha:
      for (std::size_t f = 0; f < powered_.size(); ++f) powered_[f] = power(queues[f], alphas_[f]);
      return argmax(
          [&](Schedule s) {
            double sum = 0.0;
            for (FlowMask m = s.mask(); m != 0; m &= m - 1) sum += powered_[std::countr_zero(m)];
            return sum;
          },
          rng);
    case Kind::priority: {
      // Bit (F-1-rank) set for each nonempty served flow: comparing keys as
      // integers is the lexicographic comparison in priority order.
      const int top = network_->num_flows - 1;
      return argmax(
          [&](Schedule s) {
            std::uint64_t key = 0;
            for (FlowMask m = s.mask(); m != 0; m &= m - 1) {
              const int f = std::countr_zero(m);
              if (queues[f] > 0) key |= std::uint64_t{1} << (top - rank_[f]);
            }
            return key;
          },
          rng);
    }
  }
  throw Error(Errc::internal, "unreachable scheduler kind");
}

ScheduleDecision decide(const PolicySpec& policy, std::span<const std::int64_t> queues,
                        const NetworkSpec& network, Rng& rng) {
  Scheduler scheduler(policy, network);
  return scheduler.decide(queues, rng);
}

}  // namespace mwsched
