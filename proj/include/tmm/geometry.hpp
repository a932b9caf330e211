#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace tmm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Convex polygon in the base-frame x-y plane, vertices counter-clockwise.
/// Edges are stored as outward normals n with offset b, so a point p is
/// inside iff n.dot(p) <= b for every edge.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  explicit ConvexPolygon(std::vector<Vec2> vertices);

  static ConvexPolygon rectangle(double width_x, double length_y);

  const std::vector<Vec2>& vertices() const { return verts_; }
  int num_edges() const { return static_cast<int>(normals_.size()); }
  const Vec2& edge_normal(int i) const { return normals_[i]; }
  double edge_offset(int i) const { return offsets_[i]; }

  /// Signed distance from p to the nearest edge, positive inside.
  double signed_margin(const Vec2& p) const;

  /// Largest inscribed-circle radius about the origin (min edge offset).
  double inradius() const;

  double width_x() const { return max_x_ - min_x_; }
  double length_y() const { return max_y_ - min_y_; }
  double max_y() const { return max_y_; }
  double min_y() const { return min_y_; }

  bool contains(const Vec2& p, double margin = 0.0) const {
    return signed_margin(p) > margin;
  }

 private:
  std::vector<Vec2> verts_;
  std::vector<Vec2> normals_;
  std::vector<double> offsets_;
  double min_x_ = 0, max_x_ = 0, min_y_ = 0, max_y_ = 0;
};

inline double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace tmm
