#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "mwsched/error.hpp"
#include "mwsched/presets.hpp"
#include "mwsched/scheduling.hpp"

using namespace mwsched;

namespace {

NetworkSpec net(int flows, std::vector<std::vector<int>> schedules) {
  return validate_network(RawNetwork{"t", flows, std::move(schedules)});
}

using Q = std::vector<std::int64_t>;

// Brute-force oracle: all schedules of maximal sum_{f in s} Q_f^alpha_f.
std::vector<std::size_t> best_schedules(const NetworkSpec& n, const Q& q, const std::vector<double>& alphas) {
  std::vector<double> w;
  for (const Schedule& s : n.schedules) {
    double x = 0;
    for (int f : s.members()) x += alphas.empty() ? double(q[f]) : std::pow(double(q[f]), alphas[f]);
    w.push_back(x);
  }
  const double top = *std::max_element(w.begin(), w.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] >= top * (1 - 1e-12)) out.push_back(i);
  return out;
}

}  // namespace

TEST_CASE("weight") {
  CHECK(weight(Q{5, 3}, Schedule::of({0, 1})) == 8.0);
  const double a[] = {0.5, 1.0};
  CHECK(weight(Q{9, 4}, Schedule::of({0}), a) == doctest::Approx(3.0));
  CHECK(weight(Q{0, 0}, Schedule::of({0, 1})) == 0.0);
  CHECK(weight(Q{0, 0}, Schedule::of({0, 1}), a) == 0.0);
}

TEST_CASE("strict argmax") {
  auto f3 = net(3, {{0, 1}, {2}});
  Rng rng(1);
  CHECK(decide(MaxWeight{}, Q{4, 1, 6}, f3, rng).chosen == Schedule::of({2}));
  CHECK(decide(MaxWeight{}, Q{4, 3, 6}, f3, rng).chosen == Schedule::of({0, 1}));

  auto par = net(2, {{0}, {1}});
  auto d = decide(MaxWeightAlpha{{0.5, 1.0}}, Q{9, 4}, par, rng);
  CHECK(d.chosen == Schedule::of({1}));
  CHECK(d.index == 1);
  CHECK(d.serves(1));
  CHECK_FALSE(d.serves(0));
}

TEST_CASE("ties are uniform") {
  auto par = net(2, {{0}, {1}});
  Scheduler s(MaxWeight{}, par);
  Rng rng(2024);
  const int n = 100'000;
  int first = 0;
  for (int i = 0; i < n; ++i) first += s.decide(Q{2, 2}, rng).index == 0;
  CHECK(std::abs(first - n / 2.0) < 3 * std::sqrt(n * 0.25));

  // Three-way tie on ring6.
  auto ring = preset("ring6").network;
  Scheduler r(MaxWeight{}, ring);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 90'000; ++i) ++counts[r.decide(Q{1, 1, 1, 1, 1, 1}, rng).index];
  for (int c : counts) CHECK(std::abs(c - 30'000) < 3 * std::sqrt(90'000 * (1.0 / 3) * (2.0 / 3)));

  // All-zero queues: uniform over every schedule too.
  int zero_first = 0;
  for (int i = 0; i < n; ++i) zero_first += s.decide(Q{0, 0}, rng).index == 0;
  CHECK(std::abs(zero_first - n / 2.0) < 3 * std::sqrt(n * 0.25));
}

TEST_CASE("chosen schedule is a maximizer on random instances") {
  Rng gen(77);
  for (int trial = 0; trial < 500; ++trial) {
    const int F = 2 + static_cast<int>(gen.below(6));
    std::vector<std::vector<int>> sched;
    for (int f = 0; f < F; ++f) sched.push_back({f});
    const int extra = static_cast<int>(gen.below(5));
    for (int e = 0; e < extra; ++e) {
      std::vector<int> s;
      for (int f = 0; f < F; ++f)
        if (gen.below(2)) s.push_back(f);
      if (!s.empty()) sched.push_back(s);
    }
    auto n = net(F, sched);
    Q q(F);
    for (auto& x : q) x = static_cast<std::int64_t>(gen.below(6));
    std::vector<double> alphas(F);
    for (auto& a : alphas) a = 0.25 + 0.25 * static_cast<double>(gen.below(8));

    const auto mw_best = best_schedules(n, q, {});
    const auto d = decide(MaxWeight{}, q, n, gen);
    CHECK(std::find(mw_best.begin(), mw_best.end(), d.index) != mw_best.end());

    const auto a_best = best_schedules(n, q, alphas);
    const auto da = decide(MaxWeightAlpha{alphas}, q, n, gen);
    CHECK(std::find(a_best.begin(), a_best.end(), da.index) != a_best.end());
  }
}

TEST_CASE("MaxWeightAlpha with unit exponents reproduces MaxWeight") {
  auto sw = preset("switch3").network;
  Scheduler mw(MaxWeight{}, sw);
  Scheduler ma(MaxWeightAlpha{std::vector<double>(9, 1.0)}, sw);
  Rng g(3), r1(10), r2(10);
  for (int i = 0; i < 2000; ++i) {
    Q q(9);
    for (auto& x : q) x = static_cast<std::int64_t>(g.below(4));
    CHECK(mw.decide(q, r1).index == ma.decide(q, r2).index);
  }
  CHECK(acts_as_max_weight(MaxWeightAlpha{{1.0, 1.0}}));
  CHECK_FALSE(acts_as_max_weight(MaxWeightAlpha{{1.0, 0.5}}));
  CHECK_FALSE(acts_as_max_weight(Priority{{0, 1}}));
}

TEST_CASE("scaling queues keeps the maximizing set") {
  auto sw = preset("switch3").network;
  Rng g(8), rng(1);
  for (int i = 0; i < 300; ++i) {
    Q q(9);
    for (auto& x : q) x = static_cast<std::int64_t>(g.below(7));
    const auto base = best_schedules(sw, q, {});
    for (std::int64_t c : {2, 3, 17}) {
      Q scaled = q;
      for (auto& x : scaled) x *= c;
      CHECK(best_schedules(sw, scaled, {}) == base);
      const auto d = decide(MaxWeight{}, scaled, sw, rng);
      CHECK(std::find(base.begin(), base.end(), d.index) != base.end());
    }
  }
}

TEST_CASE("parallel queues: serve the longest queue") {
  auto p = preset("parallel5").network;
  Rng g(4), rng(5);
  for (int i = 0; i < 1000; ++i) {
    Q q(5);
    for (auto& x : q) x = static_cast<std::int64_t>(g.below(10));
    const auto longest = *std::max_element(q.begin(), q.end());
    const auto d = decide(MaxWeight{}, q, p, rng);
    CHECK(q[d.chosen.members().front()] == longest);
  }
}

TEST_CASE("priority") {
  auto f3 = net(3, {{0, 1}, {2}});
  Rng rng(1);
  // Flow 2 first: serve it whenever nonempty.
  CHECK(decide(Priority{{2, 0, 1}}, Q{9, 9, 1}, f3, rng).chosen == Schedule::of({2}));
  CHECK(decide(Priority{{2, 0, 1}}, Q{9, 9, 0}, f3, rng).chosen == Schedule::of({0, 1}));
  CHECK(decide(Priority{{0, 1, 2}}, Q{1, 0, 50}, f3, rng).chosen == Schedule::of({0, 1}));
  // Lexicographic: {0,1} beats {0} when flow 1 is nonempty.
  auto n = net(3, {{0}, {0, 1}, {2}});
  CHECK(decide(Priority{{0, 1, 2}}, Q{1, 1, 1}, n, rng).chosen == Schedule::of({0, 1}));
}

TEST_CASE("policy validation") {
  CHECK_THROWS_AS(validate_policy(MaxWeightAlpha{{1.0}}, 2), Error);
  CHECK_THROWS_AS(validate_policy(MaxWeightAlpha{{1.0, 0.0}}, 2), Error);
  CHECK_THROWS_AS(validate_policy(MaxWeightAlpha{{1.0, NAN}}, 2), Error);
  CHECK_THROWS_AS(validate_policy(Priority{{0, 0}}, 2), Error);
  CHECK_THROWS_AS(validate_policy(Priority{{0, 2}}, 2), Error);
  CHECK_NOTHROW(validate_policy(Priority{{1, 0}}, 2));
  CHECK(policy_exponents(MaxWeightAlpha{{0.4, 1.0}}, 2) == std::vector<double>{0.4, 1.0});
  CHECK(policy_exponents(MaxWeight{}, 3) == std::vector<double>{1, 1, 1});
  CHECK(std::string(policy_name(Priority{{0}})) == "priority");
}
