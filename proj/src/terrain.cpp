#include "tmm/terrain.hpp"

#include <cmath>

namespace tmm {

TerrainModel TerrainModel::flat(double gravity) {
  TerrainModel t;
  t.kind_ = Kind::Flat;
  t.gravity_ = gravity;
  return t;
}

TerrainModel TerrainModel::inclined_plane(double slope_x, double slope_y, double gravity) {
  TerrainModel t;
  t.kind_ = Kind::Inclined;
  t.slope_x_ = slope_x;
  t.slope_y_ = slope_y;
  t.gravity_ = gravity;
  return t;
}

TerrainModel TerrainModel::sinusoidal_mountain(double amplitude, double period_scale,
                                               double gravity) {
  TerrainModel t;
  t.kind_ = Kind::Sinusoidal;
  t.amplitude_ = amplitude;
  t.period_scale_ = period_scale;
  t.gravity_ = gravity;
  return t;
}

TerrainModel TerrainModel::grid(std::vector<double> heights, int rows, int cols, double cell_size,
                                double origin_x, double origin_y, double gravity) {
  if (rows < 2 || cols < 2 || static_cast<int>(heights.size()) != rows * cols)
    throw std::invalid_argument("TerrainModel::grid: bad dimensions");
  for (double h : heights)
    if (!std::isfinite(h)) throw std::invalid_argument("TerrainModel::grid: non-finite height");
  TerrainModel t;
  t.kind_ = Kind::Grid;
  t.heights_ = std::move(heights);
  t.rows_ = rows;
  t.cols_ = cols;
  t.cell_ = cell_size;
  t.origin_x_ = origin_x;
  t.origin_y_ = origin_y;
  t.gravity_ = gravity;
  t.x_min_ = origin_x;
  t.x_max_ = origin_x + (cols - 1) * cell_size;
  t.y_min_ = origin_y;
  t.y_max_ = origin_y + (rows - 1) * cell_size;
  return t;
}

void TerrainModel::set_bounds(double x_min, double x_max, double y_min, double y_max) {
  x_min_ = x_min;
  x_max_ = x_max;
  y_min_ = y_min;
  y_max_ = y_max;
}

void TerrainModel::check_bounds(double x, double y) const {
  if (x < x_min_ || x > x_max_ || y < y_min_ || y > y_max_)
    throw OutOfBounds("terrain query (" + std::to_string(x) + ", " + std::to_string(y) +
                      ") outside planning bounds");
}

double TerrainModel::raw_height(double x, double y) const {
  switch (kind_) {
    case Kind::Flat:
      return 0.0;
    case Kind::Inclined:
      return slope_x_ * x + slope_y_ * y;
    case Kind::Sinusoidal:
      return amplitude_ * std::cos(std::sqrt(x * x + y * y) / period_scale_);
    case Kind::Grid: {
      // Clamp to the sample rectangle; bounds were already checked.
      double fx = (x - origin_x_) / cell_;
      double fy = (y - origin_y_) / cell_;
      fx = std::clamp(fx, 0.0, static_cast<double>(cols_ - 1));
      fy = std::clamp(fy, 0.0, static_cast<double>(rows_ - 1));
      int j = std::min(static_cast<int>(fx), cols_ - 2);
      int i = std::min(static_cast<int>(fy), rows_ - 2);
      const double tx = fx - j;
      const double ty = fy - i;
      const double h00 = heights_[i * cols_ + j];
      const double h01 = heights_[i * cols_ + j + 1];
      const double h10 = heights_[(i + 1) * cols_ + j];
      const double h11 = heights_[(i + 1) * cols_ + j + 1];
      return (1 - ty) * ((1 - tx) * h00 + tx * h01) + ty * ((1 - tx) * h10 + tx * h11);
    }
  }
  return 0.0;
}

double TerrainModel::height(double x, double y) const {
  check_bounds(x, y);
  return raw_height(x, y);
}

Vec2 TerrainModel::gradient(double x, double y) const {
  check_bounds(x, y);
  switch (kind_) {
    case Kind::Flat:
      return Vec2::Zero();
    case Kind::Inclined:
      return {slope_x_, slope_y_};
    case Kind::Sinusoidal: {
      const double r = std::sqrt(x * x + y * y);
      if (r < 1e-12) return Vec2::Zero();  // summit: gradient vanishes by symmetry
      const double dr = -amplitude_ / period_scale_ * std::sin(r / period_scale_);
      return {dr * x / r, dr * y / r};
    }
    case Kind::Grid: {
      const double h = cell_;
      auto clamped = [&](double qx, double qy) {
        qx = std::clamp(qx, x_min_, x_max_);
        qy = std::clamp(qy, y_min_, y_max_);
        return raw_height(qx, qy);
      };
      return {(clamped(x + h, y) - clamped(x - h, y)) / (2 * h),
              (clamped(x, y + h) - clamped(x, y - h)) / (2 * h)};
    }
  }
  return Vec2::Zero();
}

BaseAttitude TerrainModel::base_attitude(double x, double y, double heading) const {
  const Vec2 grad = gradient(x, y);
  const Vec3 hx(1.0, 0.0, grad.x());
  const Vec3 hy(0.0, 1.0, grad.y());
  const Vec3 n = hx.cross(hy);  // (-h_x, -h_y, 1)
  if (n.norm() < 1e-12) throw DegenerateNormal("terrain normal degenerate (cliff)");
  const Vec3 r3 = n.normalized();

  const double s = std::sin(heading);
  const double c = std::cos(heading);
  Vec3 r2 = -s * hx + c * hy;
  const double r2n = r2.norm();
  if (r2n < 1e-12) throw DegenerateNormal("terrain heading direction degenerate");
  r2 /= r2n;
  const Vec3 r1 = r2.cross(r3).normalized();

  BaseAttitude att;
  att.R.col(0) = r1;
  att.R.col(1) = r2;
  att.R.col(2) = r3;
  att.heading = heading;
  att.position = Vec3(x, y, raw_height(x, y));
  return att;
}

Vec3 gravity_in_base(const BaseAttitude& att, double g) {
  return att.R.transpose() * Vec3(0.0, 0.0, g);
}

BaseAttitude attitude_from_pitch_roll(double pitch, double roll) {
  const double ct = std::cos(pitch), st = std::sin(pitch);
  const double cp = std::cos(roll), sp = std::sin(roll);
  Mat3 rx, ry;
  rx << 1, 0, 0, 0, ct, -st, 0, st, ct;
  ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
  BaseAttitude att;
  att.R = rx * ry;  // yaw = 0
  att.heading = 0.0;
  return att;
}

}  // namespace tmm
