#include "doctest.h"

#include <cmath>
#include <numbers>

#include "mwsched/arrivals.hpp"
#include "mwsched/error.hpp"

using namespace mwsched;

namespace {

// Independent oracle: libstdc++'s special function.
double zeta_oracle(double s) { return std::riemann_zeta(s); }

}  // namespace

TEST_CASE("riemann_zeta against closed forms and the library oracle") {
  const double pi = std::numbers::pi;
  CHECK(riemann_zeta(2.0) == doctest::Approx(pi * pi / 6).epsilon(1e-12));
  CHECK(riemann_zeta(4.0) == doctest::Approx(std::pow(pi, 4) / 90).epsilon(1e-12));
  for (double s : {1.1, 1.5, 2.5, 3.0, 5.0, 10.0}) {
    CAPTURE(s);
    CHECK(riemann_zeta(s) == doctest::Approx(zeta_oracle(s)).epsilon(1e-9));
  }
  CHECK(std::isinf(riemann_zeta(1.0)));
}

TEST_CASE("moments") {
  CHECK(moment({0.5, ConstantSize{2}}, 2.0) == doctest::Approx(2.0));
  CHECK(moment({1.0, ZetaSize{3.0}}, 1.0) == doctest::Approx(zeta_oracle(3) / zeta_oracle(4)).epsilon(1e-9));
  CHECK(moment({1.0, ZetaSize{3.0}}, 1.0) == doctest::Approx(1.11063).epsilon(1e-5));
  CHECK(std::isinf(moment({1.0, ZetaSize{1.5}}, 2.0)));
  CHECK(std::isinf(moment({1.0, ZetaSize{1.5}}, 1.5)));
  CHECK(std::isfinite(moment({1.0, ZetaSize{1.5}}, 1.4)));
  // E[G^2] = (2-q)/q^2
  CHECK(moment({1.0, GeometricSize{0.5}}, 2.0) == doctest::Approx(6.0).epsilon(1e-9));
  CHECK_THROWS_AS(moment({1.0, ConstantSize{1}}, 0.0), Error);
}

TEST_CASE("moment is monotone in m") {
  for (const ArrivalSpec& a : {ArrivalSpec{0.3, ConstantSize{3}}, ArrivalSpec{0.7, GeometricSize{0.2}},
                               ArrivalSpec{0.1, ZetaSize{2.5}}}) {
    double prev = 0.0;
    for (double m = 0.25; m <= 3.0; m += 0.25) {
      const double v = moment(a, m);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("rates") {
  CHECK(rate(ArrivalSpec::bernoulli(0.3)) == doctest::Approx(0.3));
  CHECK(rate({0.1, ZetaSize{1.5}}) == doctest::Approx(0.1 * zeta_oracle(1.5) / zeta_oracle(2.5)).epsilon(1e-9));
  CHECK(rate({1.0, GeometricSize{0.5}}) == doctest::Approx(2.0));
  auto z = ArrivalSpec::zeta_with_rate(0.3, 1.5);
  CHECK(rate(z) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(with_rate(ArrivalSpec::bernoulli(0.5), 1.5), Error);
  auto g = with_rate({0.5, GeometricSize{0.5}}, 0.4);
  CHECK(g.file_prob == doctest::Approx(0.2));
}

TEST_CASE("heavy tails") {
  CHECK(is_heavy_tailed({0.1, ZetaSize{1.5}}));
  CHECK_FALSE(is_heavy_tailed({0.1, ZetaSize{2.5}}));
  CHECK(is_heavy_tailed({0.1, ZetaSize{2.0}}));
  CHECK_FALSE(is_heavy_tailed(ArrivalSpec::bernoulli(0.9)));
  CHECK_FALSE(is_heavy_tailed({0.4, GeometricSize{0.1}}));
  for (double beta : {1.2, 1.9, 2.0, 2.1, 3.5})
    CHECK(is_heavy_tailed({0.5, ZetaSize{beta}}) == std::isinf(moment({0.5, ZetaSize{beta}}, 2.0)));
}

TEST_CASE("invalid specs") {
  CHECK_THROWS_AS(validate_arrival({0.0, ConstantSize{1}}), Error);
  CHECK_THROWS_AS(validate_arrival({1.1, ConstantSize{1}}), Error);
  CHECK_THROWS_AS(validate_arrival({0.5, ConstantSize{0}}), Error);
  CHECK_THROWS_AS(validate_arrival({0.5, GeometricSize{0.0}}), Error);
  CHECK_THROWS_AS(validate_arrival({0.5, ZetaSize{1.0}}), Error);
  CHECK_NOTHROW(validate_arrival({1.0, ZetaSize{1.01}}));
}

TEST_CASE("constant sampler is deterministic") {
  ArrivalSampler s({1.0, ConstantSize{3}});
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) CHECK(s.sample(rng) == 3);
}

TEST_CASE("file probability concentrates") {
  ArrivalSampler s({0.25, GeometricSize{0.3}});
  Rng rng(11, 3);
  const int n = 1'000'000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += s.sample(rng) > 0;
  const double sigma = std::sqrt(0.25 * 0.75 / n);
  CHECK(std::abs(hits / double(n) - 0.25) < 3 * sigma);
}

TEST_CASE("light-tailed empirical means match rate") {
  const int n = 10'000'000;
  for (const ArrivalSpec& a : {ArrivalSpec{0.4, GeometricSize{0.25}}, ArrivalSpec{0.7, ConstantSize{2}}}) {
    ArrivalSampler s(a);
    Rng rng(5, 1);
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(s.sample(rng));
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean - rate(a)) < 5 * sd);
  }
}

TEST_CASE("zeta sampler mean and tail") {
  const int n = 10'000'000;
  ArrivalSampler s({1.0, ZetaSize{1.5}});
  Rng rng(99, 4);
  double sum = 0;
  std::int64_t ge[3] = {0, 0, 0}, below_one = 0;
  const std::int64_t ks[3] = {1, 10, 100};
  for (int i = 0; i < n; ++i) {
    const std::int64_t x = s.sample_size(rng);
    below_one += x < 1;
    sum += static_cast<double>(x);
    for (int j = 0; j < 3; ++j) ge[j] += x >= ks[j];
  }
  CHECK(below_one == 0);
  // Heavy tail: a 5% band on the mean, per the tolerance in use for this law.
  CHECK(sum / n == doctest::Approx(zeta_oracle(1.5) / zeta_oracle(2.5)).epsilon(0.05));
  for (int j = 0; j < 3; ++j) {
    // P(size >= k) = sum_{i >= k} i^-2.5 / zeta(2.5)
    double tail = zeta_oracle(2.5);
    for (std::int64_t i = 1; i < ks[j]; ++i) tail -= std::pow(double(i), -2.5);
    const double analytic = tail / zeta_oracle(2.5);
    const double ratio = (ge[j] / double(n)) / analytic;
    CAPTURE(ks[j]);
    CHECK(ratio >= 0.9);
    CHECK(ratio <= 1.1);
  }
}

TEST_CASE("zeta table inversion") {
  auto t = ZetaTable::get(1.5);
  CHECK(t == ZetaTable::get(1.5));
  CHECK(t->invert(0.0) == 1);
  const double p1 = 1.0 / zeta_oracle(2.5);
  CHECK(t->invert(p1 * 0.999) == 1);
  CHECK(t->invert(p1 * 1.001) == 2);
  // Beyond the table the tail is inverted analytically.
  const double u = 1.0 - t->table_tail() / 8.0;
  const std::int64_t x = t->invert(u);
  CHECK(x > ZetaTable::kTableSize);
  // P(size > x) ~ x^-beta, so an 8x smaller tail is 8^(1/1.5) = 4x further out.
  CHECK(static_cast<double>(x) == doctest::Approx(4.0 * ZetaTable::kTableSize).epsilon(0.01));
  CHECK(t->invert(std::nextafter(1.0, 0.0)) <= (std::int64_t{1} << 62));
}

TEST_CASE("zeta tail helper") {
  // sum_{k >= 1000} k^-2 against the reverse-summed oracle difference
  double partial = 0.0;
  for (int k = 999; k >= 1; --k) partial += 1.0 / (double(k) * k);
  CHECK(zeta_tail(2.0, 1000.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6 - partial).epsilon(1e-9));
}
