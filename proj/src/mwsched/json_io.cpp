#include "mwsched/json_io.hpp"

#include <charconv>
#include <cmath>

#include "mwsched/error.hpp"

namespace mwsched {

namespace {

template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_error, std::string("malformed configuration: ") + e.what());
  }
}

}  // namespace

Json parse_json(std::string_view text) {
  return guarded([&] { return Json::parse(text.begin(), text.end()); });
}

Json network_to_json(const NetworkSpec& network) {
  Json schedules = Json::array();
  for (const Schedule& s : network.schedules) schedules.push_back(s.members());
  return {{"name", network.name}, {"num_flows", network.num_flows}, {"schedules", schedules}};
}

NetworkSpec network_from_json(const Json& j) {
  return guarded([&] {
    RawNetwork raw;
    raw.name = j.value("name", std::string("custom"));
    raw.num_flows = j.at("num_flows").get<int>();
    raw.schedules = j.at("schedules").get<std::vector<std::vector<int>>>();
    return validate_network(raw);
  });
}

Json arrival_to_json(const ArrivalSpec& spec) {
  Json size = std::visit(
      [](const auto& d) -> Json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantSize>)
          return {{"kind", "constant"}, {"value", d.value}};
        else if constexpr (std::is_same_v<T, GeometricSize>)
          return {{"kind", "geometric"}, {"success_prob", d.success_prob}};
        else
          return {{"kind", "zeta"}, {"tail_index", d.tail_index}};
      },
      spec.size);
  return {{"file_prob", spec.file_prob}, {"size", size}};
}

ArrivalSpec arrival_from_json(const Json& j) {
  return guarded([&] {
    ArrivalSpec spec;
    spec.file_prob = j.at("file_prob").get<double>();
    const Json& size = j.at("size");
    const auto kind = size.at("kind").get<std::string>();
    if (kind == "constant")
      spec.size = ConstantSize{size.value("value", std::int64_t{1})};
    else if (kind == "geometric")
      spec.size = GeometricSize{size.at("success_prob").get<double>()};
    else if (kind == "zeta")
      spec.size = ZetaSize{size.at("tail_index").get<double>()};
    else
      throw Error(Errc::config_error, "unknown size kind '" + kind + "'");
    validate_arrival(spec);
    return spec;
  });
}

Json policy_to_json(const PolicySpec& policy) {
  Json j = {{"kind", policy_name(policy)}};
  if (const auto* a = std::get_if<MaxWeightAlpha>(&policy)) j["alphas"] = a->alphas;
  if (const auto* p = std::get_if<Priority>(&policy)) j["order"] = p->order;
  return j;
}

PolicySpec policy_from_json(const Json& j, int num_flows) {
  return guarded([&]() -> PolicySpec {
    const auto kind = j.at("kind").get<std::string>();
    PolicySpec policy;
    if (kind == "max_weight")
      policy = MaxWeight{};
    else if (kind == "max_weight_alpha")
      policy = MaxWeightAlpha{j.at("alphas").get<std::vector<double>>()};
    else if (kind == "priority")
      policy = Priority{j.at("order").get<std::vector<int>>()};
    else
      throw Error(Errc::config_error, "unknown policy kind '" + kind + "'");
    validate_policy(policy, num_flows);
    return policy;
  });
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace mwsched
