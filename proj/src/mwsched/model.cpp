#include "mwsched/model.hpp"

#include <algorithm>

#include "mwsched/error.hpp"

namespace mwsched {

namespace {

void check_flow_count(int num_flows) {
  if (num_flows <= 0) throw Error(Errc::invalid_argument, "num_flows must be positive");
  if (num_flows > kMaxFlows)
    throw Error(Errc::too_many_flows,
                "num_flows=" + std::to_string(num_flows) + " exceeds the 64-flow limit");
}

NetworkSpec finish(std::string name, int num_flows, const std::vector<Schedule>& schedules) {
  NetworkSpec spec{std::move(name), num_flows, {}};
  FlowMask covered = 0;
  for (const Schedule& s : schedules) {
    if (s.empty()) throw Error(Errc::empty_schedule, "schedule with no members");
    if ((s.mask() & ~spec.all_flows()) != 0)
      throw Error(Errc::flow_id_out_of_range, "schedule member outside [0, num_flows)");
    if (std::find(spec.schedules.begin(), spec.schedules.end(), s) == spec.schedules.end())
      spec.schedules.push_back(s);
    covered |= s.mask();
  }
  if (spec.schedules.empty()) throw Error(Errc::empty_schedule, "no feasible schedules given");
  const FlowMask missing = spec.all_flows() & ~covered;
  if (missing != 0) {
    const int f = std::countr_zero(missing);
    throw Error(Errc::flow_never_served,
                "flow " + std::to_string(f) + " is not in any feasible schedule", f);
  }
  return spec;
}

}  // namespace

NetworkSpec validate_network(const RawNetwork& raw) {
  check_flow_count(raw.num_flows);
  std::vector<Schedule> schedules;
  schedules.reserve(raw.schedules.size());
  for (const auto& members : raw.schedules) {
    if (members.empty()) throw Error(Errc::empty_schedule, "schedule with no members");
    FlowMask m = 0;
    for (int f : members) {
      if (f < 0 || f >= raw.num_flows)
        throw Error(Errc::flow_id_out_of_range,
                    "flow id " + std::to_string(f) + " outside [0, " +
                        std::to_string(raw.num_flows) + ")",
                    f);
      m |= FlowMask{1} << f;
    }
    schedules.emplace_back(m);
  }
  return finish(raw.name, raw.num_flows, schedules);
}

NetworkSpec validate_network(const NetworkSpec& spec) {
  check_flow_count(spec.num_flows);
  return finish(spec.name, spec.num_flows, spec.schedules);
}

bool conflicts(const NetworkSpec& spec, FlowId f, FlowId g) {
  for (FlowId id : {f, g}) {
    if (id.index < 0 || id.index >= spec.num_flows)
      throw Error(Errc::flow_id_out_of_range, "flow id " + std::to_string(id.index) + " out of range",
                  id.index);
  }
  if (f == g) throw Error(Errc::invalid_argument, "conflict query needs two distinct flows");
  const FlowMask both = (FlowMask{1} << f.index) | (FlowMask{1} << g.index);
  return std::none_of(spec.schedules.begin(), spec.schedules.end(),
                      [both](Schedule s) { return (s.mask() & both) == both; });
}

}  // namespace mwsched
