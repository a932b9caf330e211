#include "tmm/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace tmm {

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) : verts_(std::move(vertices)) {
  if (verts_.size() < 3) throw std::invalid_argument("ConvexPolygon: need at least 3 vertices");
  const int n = static_cast<int>(verts_.size());
  min_x_ = min_y_ = std::numeric_limits<double>::infinity();
  max_x_ = max_y_ = -std::numeric_limits<double>::infinity();
  for (const auto& v : verts_) {
    min_x_ = std::min(min_x_, v.x());
    max_x_ = std::max(max_x_, v.x());
    min_y_ = std::min(min_y_, v.y());
    max_y_ = std::max(max_y_, v.y());
  }
  // Signed area decides orientation; normalize to CCW.
  double area2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2& a = verts_[i];
    const Vec2& b = verts_[(i + 1) % n];
    area2 += a.x() * b.y() - b.x() * a.y();
  }
  if (area2 < 0.0) std::reverse(verts_.begin(), verts_.end());

  for (int i = 0; i < n; ++i) {
    const Vec2& a = verts_[i];
    const Vec2& b = verts_[(i + 1) % n];
    Vec2 e = b - a;
    const double len = e.norm();
    if (len < 1e-12) throw std::invalid_argument("ConvexPolygon: degenerate edge");
    Vec2 outward(e.y() / len, -e.x() / len);  // CCW: outward is edge rotated -90 deg
    normals_.push_back(outward);
    offsets_.push_back(outward.dot(a));
  }
}

ConvexPolygon ConvexPolygon::rectangle(double width_x, double length_y) {
  const double hx = 0.5 * width_x;
  const double hy = 0.5 * length_y;
  return ConvexPolygon({{hx, -hy}, {hx, hy}, {-hx, hy}, {-hx, -hy}});
}

double ConvexPolygon::signed_margin(const Vec2& p) const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < num_edges(); ++i) {
    m = std::min(m, offsets_[i] - normals_[i].dot(p));
  }
  return m;
}

double ConvexPolygon::inradius() const {
  double r = std::numeric_limits<double>::infinity();
  for (double b : offsets_) r = std::min(r, b);
  return r;
}

}  // namespace tmm
