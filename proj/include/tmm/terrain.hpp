#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmm/geometry.hpp"

namespace tmm {

struct OutOfBounds : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateNormal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Orientation of the mobile base on the terrain. Column 2 of R is the
/// heading direction on the surface, column 3 the surface normal.
struct BaseAttitude {
  Mat3 R = Mat3::Identity();
  double heading = 0.0;    // psi_bar, heading projected on the inertial x-y plane
  Vec3 position = Vec3::Zero();  // base position in the inertial frame

  /// Entries r13, r23, r33 of the inertial-to-base rotation R^T: the
  /// direction of gravity in the base frame is g * (r13, r23, r33).
  double r13() const { return R(2, 0); }
  double r23() const { return R(2, 1); }
  double r33() const { return R(2, 2); }
  /// Angle between the surface normal and inertial z.
  double slope_angle() const { return std::acos(std::min(1.0, r33())); }
};

/// Height field s_z = h(s_x, s_y), analytic or sampled on a regular grid.
/// Immutable after construction; all queries are pure.
class TerrainModel {
 public:
  static TerrainModel flat(double gravity = 9.81);
  /// h = x*slope_x + y*slope_y
  static TerrainModel inclined_plane(double slope_x, double slope_y, double gravity = 9.81);
  /// h = amplitude * cos(sqrt(x^2+y^2) / period_scale)
  static TerrainModel sinusoidal_mountain(double amplitude, double period_scale,
                                          double gravity = 9.81);
  /// Row-major height samples; sample (i, j) sits at
  /// (origin_x + j*cell, origin_y + i*cell). Bilinear height, central
  /// finite-difference gradients with step = cell size.
  static TerrainModel grid(std::vector<double> heights, int rows, int cols, double cell_size,
                           double origin_x, double origin_y, double gravity = 9.81);

  void set_bounds(double x_min, double x_max, double y_min, double y_max);

  double height(double x, double y) const;
  Vec2 gradient(double x, double y) const;
  BaseAttitude base_attitude(double x, double y, double heading) const;

  double gravity_magnitude() const { return gravity_; }

 private:
  TerrainModel() = default;
  void check_bounds(double x, double y) const;
  double raw_height(double x, double y) const;

  enum class Kind { Flat, Inclined, Sinusoidal, Grid } kind_ = Kind::Flat;
  double gravity_ = 9.81;
  double amplitude_ = 0, period_scale_ = 1;
  double slope_x_ = 0, slope_y_ = 0;
  std::vector<double> heights_;
  int rows_ = 0, cols_ = 0;
  double cell_ = 1.0, origin_x_ = 0.0, origin_y_ = 0.0;
  double x_min_ = -1e9, x_max_ = 1e9, y_min_ = -1e9, y_max_ = 1e9;
};

/// Gravity vector expressed in the base frame, g_F0 = R^T * (0, 0, g).
/// Points along +z on flat ground (g_z > 0 convention).
Vec3 gravity_in_base(const BaseAttitude& att, double g);

/// Attitude assembled directly from pitch/roll angles (z-x-y Euler sequence
/// with yaw = 0), for scenarios defined on an abstract slope rather than a
/// terrain function. Positive roll makes g_x^{F0} negative, which shifts the
/// quasi-static ZMP toward the +x edge of the support polygon.
BaseAttitude attitude_from_pitch_roll(double pitch, double roll);

}  // namespace tmm
