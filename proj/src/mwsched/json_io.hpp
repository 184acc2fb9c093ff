#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "mwsched/arrivals.hpp"
#include "mwsched/model.hpp"
#include "mwsched/scheduling.hpp"

namespace mwsched {

using Json = nlohmann::json;

// Parse failures and schema violations surface as Errc::config_error.
Json parse_json(std::string_view text);

// {"name": str, "num_flows": int, "schedules": [[int, ...], ...]}
Json network_to_json(const NetworkSpec& network);
NetworkSpec network_from_json(const Json& j);

// {"file_prob": p, "size": {"kind": "constant"|"geometric"|"zeta", ...}}
Json arrival_to_json(const ArrivalSpec& spec);
ArrivalSpec arrival_from_json(const Json& j);

// {"kind": "max_weight"|"max_weight_alpha"|"priority", "alphas": [...], "order": [...]}
Json policy_to_json(const PolicySpec& policy);
PolicySpec policy_from_json(const Json& j, int num_flows);

// Shortest decimal that round-trips; "inf"/"nan" for non-finite values.
std::string format_number(double x);

}  // namespace mwsched
