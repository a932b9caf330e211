#include <doctest.h>

#include <random>

#include "tmm/terrain.hpp"
#include "tmm/traction.hpp"

using namespace tmm;

namespace {
const MassAggregates kAgg{27650.0, 0.0, 0.0, 64000.0};
}

TEST_CASE("flat ground carries the full weight with no held friction") {
  const TractionState ts =
      traction_state(kAgg, Vec3(0, 0, 9.81), ZmpPoint{0.0, 0.0}, 3.23, 0.6);
  CHECK(ts.f_n == doctest::Approx(kAgg.M * 9.81));
  CHECK(ts.f_f0 == doctest::Approx(0.0));
  CHECK(ts.l == doctest::Approx(ts.r));
}

TEST_CASE("15 degree slope statics") {
  const BaseAttitude att = attitude_from_pitch_roll(0.0, 15.0 * M_PI / 180.0);
  const Vec3 g = gravity_in_base(att, 9.81);
  const TractionState ts = traction_state(kAgg, g, ZmpPoint{0.2, 0.0}, 3.23, 0.6);
  CHECK(ts.f_n == doctest::Approx(kAgg.M * 9.81 * std::cos(15.0 * M_PI / 180.0)));
  CHECK(ts.f_f0 == doctest::Approx(kAgg.M * 9.81 * std::sin(15.0 * M_PI / 180.0)));
  CHECK(ts.l == doctest::Approx(0.2 + 3.23 / 2.0));
}

TEST_CASE("slopes steeper than the friction cone slide") {
  const double a = std::atan(0.6) + 0.01;
  const BaseAttitude att = attitude_from_pitch_roll(0.0, a);
  const Vec3 g = gravity_in_base(att, 9.81);
  CHECK_THROWS_AS(traction_state(kAgg, g, ZmpPoint{0.0, 0.0}, 3.23, 0.6), SlidingStatically);
}

TEST_CASE("available traction splits inversely with the lever arms") {
  TractionState ts;
  ts.f_n = 1000.0;
  ts.mu = 0.6;
  ts.f_f0 = 500.0;  // slack = 100 N
  ts.l = 1.0;
  ts.r = 3.0;
  const AvailableTraction a = available_traction(ts);
  CHECK(a.left == doctest::Approx(75.0));
  CHECK(a.right == doctest::Approx(25.0));
  CHECK(a.left + a.right == doctest::Approx(ts.mu * ts.f_n - ts.f_f0));
}

TEST_CASE("score is maximized on the center line") {
  TractionState ts;
  ts.f_n = 1000.0;
  ts.mu = 0.6;
  ts.f_f0 = 200.0;
  const double gauge = 3.23;
  double best = -1.0;
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    ts.l = gauge * i / 100.0;
    ts.r = gauge - ts.l;
    const double s = traction_score(ts);
    if (i > 0 && i <= 50) CHECK(s >= prev);  // non-decreasing toward the center
    if (i > 50) CHECK(s <= prev);
    prev = s;
    best = std::max(best, s);
  }
  ts.l = ts.r = gauge / 2.0;
  CHECK(traction_score(ts) == doctest::Approx((ts.mu * ts.f_n - ts.f_f0) / 2.0));
  CHECK(best == doctest::Approx((ts.mu * ts.f_n - ts.f_f0) / 2.0));
}

TEST_CASE("exhausted friction cone leaves no traction") {
  TractionState ts;
  ts.f_n = 1000.0;
  ts.mu = 0.5;
  ts.f_f0 = 500.0;
  ts.l = 0.5;
  ts.r = 2.73;
  CHECK(traction_score(ts) == doctest::Approx(0.0));
}

TEST_CASE("deviation limit shrinks linearly with slope") {
  const double w = 3.23;
  CHECK(deviation_limit(0.0, w) == doctest::Approx(0.5 * w));
  CHECK(deviation_limit(45.0 * M_PI / 180.0, w) == doctest::Approx(0.1 * w));
  CHECK(deviation_limit(22.5 * M_PI / 180.0, w) == doctest::Approx(0.3 * w));
  CHECK(deviation_limit(60.0 * M_PI / 180.0, w) == doctest::Approx(0.1 * w));
}
