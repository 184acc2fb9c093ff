#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "mwsched/model.hpp"
#include "mwsched/rng.hpp"

namespace mwsched {

struct MaxWeight {
  friend bool operator==(const MaxWeight&, const MaxWeight&) = default;
};

struct MaxWeightAlpha {
  std::vector<double> alphas;
  friend bool operator==(const MaxWeightAlpha&, const MaxWeightAlpha&) = default;
};

// Preemptive priority, order[0] highest.
struct Priority {
  std::vector<int> order;
  friend bool operator==(const Priority&, const Priority&) = default;
};

using PolicySpec = std::variant<MaxWeight, MaxWeightAlpha, Priority>;

void validate_policy(const PolicySpec& policy, int num_flows);

// Per-flow exponents the policy weighs queues with (1 for Max-Weight and
// priority).
std::vector<double> policy_exponents(const PolicySpec& policy, int num_flows);

// Max-Weight itself, or Max-Weight-alpha with every exponent equal to 1.
bool acts_as_max_weight(const PolicySpec& policy);

const char* policy_name(const PolicySpec& policy);

struct ScheduleDecision {
  Schedule chosen;
  std::size_t index = 0;  // position in NetworkSpec::schedules

  // S_f(t)
  bool serves(int flow) const { return chosen.contains(flow); }
};

// sum_{f in s} Q_f^alpha_f; alphas empty means all ones.
double weight(std::span<const std::int64_t> queues, Schedule s, std::span<const double> alphas = {});

// Policy compiled against one network. Stateless between calls apart from the
// scratch buffer, so one instance per thread.
class Scheduler {
 public:
  Scheduler(const PolicySpec& policy, const NetworkSpec& network);

  ScheduleDecision decide(std::span<const std::int64_t> queues, Rng& rng);

 private:
  enum class Kind { max_weight, alpha, priority };

  template <typename Weight>
  ScheduleDecision argmax(Weight&& w, Rng& rng) const;

  Kind kind_;
  const NetworkSpec* network_;
  std::vector<double> alphas_;
  std::vector<int> rank_;
  std::vector<double> powered_;
};

// Ties are broken uniformly at random. Priority picks the schedule whose set
// of served nonempty flows is lexicographically best in priority order.
ScheduleDecision decide(const PolicySpec& policy, std::span<const std::int64_t> queues,
                        const NetworkSpec& network, Rng& rng);

}  // namespace mwsched
