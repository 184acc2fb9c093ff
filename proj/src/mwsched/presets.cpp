#include "mwsched/presets.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <optional>
#include <utility>

#include "mwsched/error.hpp"

namespace mwsched {

namespace {

constexpr double kHeavyTail = 1.5;
constexpr int kMaxSwitchPorts = 5;
constexpr int kMaxGridSide = 4;
constexpr std::size_t kMaxGridSchedules = 10'000;

// "parallel4" or "parallel(4)" -> 4.
std::optional<int> parse_size(std::string_view name, std::string_view prefix) {
  if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
  std::string_view rest = name.substr(prefix.size());
  if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')')
    rest = rest.substr(1, rest.size() - 2);
  if (rest.empty()) return std::nullopt;
  int n = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
  if (ec != std::errc{} || ptr != rest.data() + rest.size()) return std::nullopt;
  return n;
}

Preset make(std::string name, int flows, const std::vector<std::vector<int>>& schedules,
            std::vector<ArrivalSpec> arrivals) {
  return {validate_network(RawNetwork{std::move(name), flows, schedules}), std::move(arrivals)};
}

Preset parallel(int n) {
  if (n < 1) throw Error(Errc::invalid_argument, "parallel preset needs n >= 1");
  if (n > kMaxFlows) throw Error(Errc::preset_too_large, "parallel preset limited to 64 queues");
  std::vector<std::vector<int>> s;
  for (int f = 0; f < n; ++f) s.push_back({f});
  return make("parallel(" + std::to_string(n) + ")", n, s,
              std::vector<ArrivalSpec>(n, ArrivalSpec::bernoulli(0.6 / n)));
}

Preset input_switch(int n) {
  if (n < 1) throw Error(Errc::invalid_argument, "switch preset needs n >= 1");
  if (n > kMaxSwitchPorts)
    throw Error(Errc::preset_too_large, "switch preset enumerates n! matchings; n <= 5 supported");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> s;
  do {
    std::vector<int> matching;
    for (int i = 0; i < n; ++i) matching.push_back(i * n + perm[i]);
    s.push_back(std::move(matching));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return make("switch(" + std::to_string(n) + ")", n * n, s,
              std::vector<ArrivalSpec>(n * n, ArrivalSpec::bernoulli(0.6 / n)));
}

// All maximal matchings of the n x n grid graph. Edges are numbered
// horizontal first (row-major), then vertical.
Preset grid(int n) {
  if (n < 2) throw Error(Errc::invalid_argument, "grid preset needs n >= 2");
  if (n > kMaxGridSide)
    throw Error(Errc::preset_too_large,
                "grid(" + std::to_string(n) + ") has more than 10^4 maximal matchings");
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c + 1 < n; ++c) edges.emplace_back(r * n + c, r * n + c + 1);
  for (int r = 0; r + 1 < n; ++r)
    for (int c = 0; c < n; ++c) edges.emplace_back(r * n + c, (r + 1) * n + c);
  const int m = static_cast<int>(edges.size());

  // Last neighbour index per edge: once the search passes it, an unchosen
  // edge with both endpoints free can never be blocked.
  std::vector<int> last_neighbour(m);
  for (int i = 0; i < m; ++i) {
    last_neighbour[i] = i;
    for (int j = 0; j < m; ++j) {
      const auto [a, b] = edges[i];
      const auto [c, d] = edges[j];
      if (j != i && (a == c || a == d || b == c || b == d))
        last_neighbour[i] = std::max(last_neighbour[i], j);
    }
  }

  std::vector<std::vector<int>> schedules;
  std::vector<bool> chosen(m, false);
  std::vector<bool> node_used(n * n, false);
  auto free_edge = [&](int j) { return !node_used[edges[j].first] && !node_used[edges[j].second]; };

  auto search = [&](auto&& self, int i) -> void {
    for (int j = 0; j < i; ++j)
      if (last_neighbour[j] == i - 1 && !chosen[j] && free_edge(j)) return;
    if (i == m) {
      std::vector<int> s;
      for (int j = 0; j < m; ++j)
        if (chosen[j]) s.push_back(j);
      schedules.push_back(std::move(s));
      if (schedules.size() > kMaxGridSchedules)
        throw Error(Errc::preset_too_large, "grid preset exceeds 10^4 schedules");
      return;
    }
    if (free_edge(i)) {
      chosen[i] = true;
      node_used[edges[i].first] = node_used[edges[i].second] = true;
      self(self, i + 1);
      chosen[i] = false;
      node_used[edges[i].first] = node_used[edges[i].second] = false;
    }
    self(self, i + 1);
  };
  search(search, 0);

  return make("grid(" + std::to_string(n) + ")", m, schedules,
              std::vector<ArrivalSpec>(m, ArrivalSpec::bernoulli(0.1)));
}

}  // namespace

Preset preset(std::string_view name) {
  if (name == "fig1") {
    Preset p = parallel(2);
    p.network.name = "fig1";
    p.arrivals = {ArrivalSpec{0.1, ZetaSize{kHeavyTail}}, ArrivalSpec::bernoulli(0.3)};
    return p;
  }
  if (name == "fig2")
    return make("fig2", 3, {{0}, {1, 2}},
                {ArrivalSpec{0.1, ZetaSize{kHeavyTail}}, ArrivalSpec::bernoulli(0.3),
                 ArrivalSpec::bernoulli(0.3)});
  if (name == "fig3")
    return make("fig3", 3, {{0, 1}, {2}},
                {ArrivalSpec::zeta_with_rate(0.3, kHeavyTail), ArrivalSpec::bernoulli(0.6),
                 ArrivalSpec::bernoulli(0.3)});
  if (name == "switch2x2")
    return make("switch2x2", 4, {{0, 3}, {1, 2}},
                {ArrivalSpec::zeta_with_rate(0.2, kHeavyTail), ArrivalSpec::bernoulli(0.2),
                 ArrivalSpec::bernoulli(0.2), ArrivalSpec::bernoulli(0.2)});
  if (name == "ring6") {
    std::vector<ArrivalSpec> a(6, ArrivalSpec::bernoulli(0.2));
    a[0] = ArrivalSpec::zeta_with_rate(0.2, kHeavyTail);
    return make("ring6", 6, {{0, 3}, {1, 4}, {2, 5}}, std::move(a));
  }
  if (auto n = parse_size(name, "parallel")) return parallel(*n);
  if (auto n = parse_size(name, "switch")) return input_switch(*n);
  if (auto n = parse_size(name, "grid")) return grid(*n);
  throw Error(Errc::unknown_preset, "unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  return {"parallel<n>", "fig1", "fig2", "fig3", "switch2x2", "switch<n>", "ring6", "grid<n>"};
}

}  // namespace mwsched
