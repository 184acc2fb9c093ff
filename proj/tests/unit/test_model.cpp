#include "doctest.h"

#include "mwsched/error.hpp"
#include "mwsched/model.hpp"

using namespace mwsched;

namespace {

NetworkSpec net(int flows, std::vector<std::vector<int>> schedules) {
  return validate_network(RawNetwork{"t", flows, std::move(schedules)});
}

Errc code_of(const RawNetwork& raw) {
  try {
    validate_network(raw);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return Errc::internal;
}

}  // namespace

TEST_CASE("valid networks") {
  auto p = net(2, {{0}, {1}});
  CHECK(p.num_flows == 2);
  CHECK(p.schedules.size() == 2);

  auto f3 = net(3, {{0, 1}, {2}});
  CHECK(f3.schedules[0] == Schedule::of({0, 1}));
  CHECK(f3.schedules[1] == Schedule::of({2}));
}

TEST_CASE("uncovered flow is reported with its id") {
  try {
    net(2, {{0}});
    FAIL("expected FlowNeverServed");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::flow_never_served);
    REQUIRE(e.flow().has_value());
    CHECK(*e.flow() == 1);
  }
}

TEST_CASE("malformed networks") {
  CHECK(code_of({"t", 2, {{0}, {}}}) == Errc::empty_schedule);
  CHECK(code_of({"t", 2, {{0}, {1, 2}}}) == Errc::flow_id_out_of_range);
  CHECK(code_of({"t", 2, {{0}, {-1}}}) == Errc::flow_id_out_of_range);
  CHECK(code_of({"t", 65, {{0}}}) == Errc::too_many_flows);
  CHECK(code_of({"t", 0, {}}) == Errc::invalid_argument);
}

TEST_CASE("64 flows fit in a mask") {
  std::vector<std::vector<int>> s;
  for (int f = 0; f < 64; ++f) s.push_back({f});
  auto n = net(64, s);
  CHECK(n.all_flows() == ~FlowMask{0});
  CHECK(n.schedules[63].contains(63));
}

TEST_CASE("duplicate schedules dropped, order kept") {
  auto n = net(3, {{2}, {0, 1}, {1, 0}, {2}});
  REQUIRE(n.schedules.size() == 2);
  CHECK(n.schedules[0] == Schedule::of({2}));
  CHECK(n.schedules[1] == Schedule::of({0, 1}));
}

TEST_CASE("conflicts") {
  auto f3 = net(3, {{0, 1}, {2}});
  CHECK(conflicts(f3, FlowId{1}, FlowId{2}));
  CHECK_FALSE(conflicts(f3, FlowId{0}, FlowId{1}));
  auto p = net(2, {{0}, {1}});
  CHECK(conflicts(p, FlowId{0}, FlowId{1}));

  CHECK_THROWS_AS(conflicts(p, FlowId{0}, FlowId{2}), Error);
  CHECK_THROWS_AS(conflicts(p, FlowId{0}, FlowId{0}), Error);

  auto ring = net(6, {{0, 3}, {1, 4}, {2, 5}});
  for (int f = 0; f < 6; ++f)
    for (int g = 0; g < 6; ++g)
      if (f != g) CHECK(conflicts(ring, FlowId{f}, FlowId{g}) == conflicts(ring, FlowId{g}, FlowId{f}));
}

TEST_CASE("schedule members") {
  auto s = Schedule::of({5, 0, 63});
  CHECK(s.size() == 3);
  CHECK(s.members() == std::vector<int>{0, 5, 63});
  CHECK_FALSE(s.contains(1));
}
