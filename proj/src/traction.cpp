#include "tmm/traction.hpp"

#include <algorithm>
#include <cmath>

namespace tmm {

TractionState traction_state(const MassAggregates& agg, const Vec3& gravity, const ZmpPoint& zmp,
                             double gauge, double mu) {
  TractionState ts;
  ts.f_n = agg.M * gravity.z();
  ts.f_f0 = agg.M * std::hypot(gravity.x(), gravity.y());
  ts.mu = mu;
  if (ts.f_f0 > mu * ts.f_n)
    throw SlidingStatically("traction_state: static friction demand exceeds the friction cone");
  ts.l = std::clamp(zmp.x + 0.5 * gauge, 0.0, gauge);
  ts.r = gauge - ts.l;
  return ts;
}

AvailableTraction available_traction(const TractionState& ts) {
  const double slack = ts.mu * ts.f_n - ts.f_f0;
  const double span = ts.l + ts.r;
  return {slack * ts.r / span, slack * ts.l / span};
}

double traction_score(const TractionState& ts) {
  const AvailableTraction a = available_traction(ts);
  return std::min(a.left, a.right);
}

double deviation_limit(double slope_angle, double polygon_width) {
  const double cap = 45.0 * M_PI / 180.0;
  const double s = std::clamp(slope_angle, 0.0, cap);
  return polygon_width * (0.5 - 0.4 * s / cap);
}

}  // namespace tmm
