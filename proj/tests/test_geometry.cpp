#include <doctest.h>

#include "tmm/geometry.hpp"

using namespace tmm;

TEST_CASE("rectangle margins and inradius") {
  ConvexPolygon poly = ConvexPolygon::rectangle(3.23, 5.0);
  CHECK(poly.signed_margin(Vec2(0, 0)) == doctest::Approx(1.615));
  CHECK(poly.inradius() == doctest::Approx(1.615));
  CHECK(poly.width_x() == doctest::Approx(3.23));
  CHECK(poly.length_y() == doctest::Approx(5.0));
  CHECK(poly.max_y() == doctest::Approx(2.5));
}

TEST_CASE("edge points are not strictly interior") {
  ConvexPolygon poly = ConvexPolygon::rectangle(2.0, 2.0);
  CHECK(poly.contains(Vec2(0, 0)));
  CHECK(!poly.contains(Vec2(1.0, 0.0)));
  CHECK(poly.signed_margin(Vec2(1.0, 0.0)) == doctest::Approx(0.0));
  CHECK(poly.signed_margin(Vec2(2.0, 0.0)) == doctest::Approx(-1.0));
}

TEST_CASE("clockwise input is normalized to counter-clockwise") {
  ConvexPolygon cw(std::vector<Vec2>{{1, -1}, {-1, -1}, {-1, 1}, {1, 1}});
  ConvexPolygon ccw(std::vector<Vec2>{{1, -1}, {1, 1}, {-1, 1}, {-1, -1}});
  CHECK(cw.signed_margin(Vec2(0.5, 0.0)) == doctest::Approx(ccw.signed_margin(Vec2(0.5, 0.0))));
  CHECK(cw.signed_margin(Vec2(0.5, 0.0)) == doctest::Approx(0.5));
}

TEST_CASE("degenerate polygons are rejected") {
  CHECK_THROWS(ConvexPolygon(std::vector<Vec2>{{0, 0}, {1, 1}}));
  CHECK_THROWS(ConvexPolygon(std::vector<Vec2>{{0, 0}, {0, 0}, {1, 1}}));
}

TEST_CASE("wrap_angle") {
  CHECK(wrap_angle(3 * M_PI) == doctest::Approx(M_PI));
  CHECK(std::abs(wrap_angle(-3 * M_PI)) == doctest::Approx(M_PI));
  CHECK(wrap_angle(0.3) == doctest::Approx(0.3));
}
