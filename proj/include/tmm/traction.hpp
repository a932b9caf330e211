#pragma once

#include <stdexcept>

#include "tmm/stability.hpp"

namespace tmm {

struct SlidingStatically : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Normal and friction loads split between the two track lines. l and r are
/// the ZMP distances to the left (+x) and right (-x) track contact lines.
struct TractionState {
  double f_n = 0.0;   // total normal force
  double f_f0 = 0.0;  // static friction holding the robot on the hill
  double mu = 0.0;
  double l = 0.0, r = 0.0;
};

/// Throws SlidingStatically when gravity alone exceeds the friction cone.
TractionState traction_state(const MassAggregates& agg, const Vec3& gravity, const ZmpPoint& zmp,
                             double gauge, double mu);

/// Conservative per-side available traction: the side carrying less normal
/// load gets proportionally less of the slack mu*f_n - f_f0.
struct AvailableTraction {
  double left = 0.0, right = 0.0;
};

AvailableTraction available_traction(const TractionState& ts);

/// min(left, right); maximized when the ZMP sits on the longitudinal
/// center line (l = r).
double traction_score(const TractionState& ts);

/// Slope-dependent limit on |x_zmp|: 50% of the polygon width on flat
/// ground shrinking linearly to 10% at 45 degrees (clamped beyond).
double deviation_limit(double slope_angle, double polygon_width);

}  // namespace tmm
