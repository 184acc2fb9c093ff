#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace mwsched {

inline constexpr int kMaxFlows = 64;

using FlowMask = std::uint64_t;

struct FlowId {
  int index = 0;

  friend auto operator<=>(FlowId, FlowId) = default;
};

// A feasible schedule: the set of flows served together in one slot.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(FlowMask mask) : mask_(mask) {}

  static Schedule of(const std::vector<int>& flows) {
    FlowMask m = 0;
    for (int f : flows) m |= FlowMask{1} << f;
    return Schedule(m);
  }

  FlowMask mask() const { return mask_; }
  bool contains(int flow) const { return (mask_ >> flow) & 1u; }
  int size() const { return std::popcount(mask_); }
  bool empty() const { return mask_ == 0; }

  std::vector<int> members() const {
    std::vector<int> out;
    for (FlowMask m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }

  friend bool operator==(Schedule, Schedule) = default;

 private:
  FlowMask mask_ = 0;
};

struct NetworkSpec {
  std::string name;
  int num_flows = 0;
  std::vector<Schedule> schedules;

  FlowMask all_flows() const {
    return num_flows >= 64 ? ~FlowMask{0} : (FlowMask{1} << num_flows) - 1;
  }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Unvalidated input, e.g. straight from JSON.
struct RawNetwork {
  std::string name;
  int num_flows = 0;
  std::vector<std::vector<int>> schedules;
};

// Rejects empty schedules, out-of-range members, flows no schedule serves and
// more than kMaxFlows flows. Duplicate schedules are dropped, first occurrence
// wins, so the schedule order of the input is otherwise preserved.
NetworkSpec validate_network(const RawNetwork& raw);

// Re-validates an already built spec (schedules given as masks).
NetworkSpec validate_network(const NetworkSpec& spec);

// True iff no feasible schedule contains both flows.
bool conflicts(const NetworkSpec& spec, FlowId f, FlowId g);

}  // namespace mwsched
