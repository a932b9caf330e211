#pragma once

#include <algorithm>
#include <cmath>

namespace tmm::detail {

/// Rest-to-rest 1-D motion with acceleration a_up, deceleration a_dn and a
/// speed cap, possibly asymmetric. All magnitudes; `sign` carries direction.
struct ScalarProfile {
  double s0 = 0.0;
  double sign = 1.0;
  double a_up = 0.0, a_dn = 0.0;
  double v_peak = 0.0;
  double t_up = 0.0, t_coast = 0.0, t_dn = 0.0;

  double total() const { return t_up + t_coast + t_dn; }

  static ScalarProfile rest_to_rest(double s0, double s1, double v_max, double a_up,
                                    double a_dn) {
    ScalarProfile p;
    p.s0 = s0;
    const double d = s1 - s0;
    p.sign = d >= 0.0 ? 1.0 : -1.0;
    p.a_up = a_up;
    p.a_dn = a_dn;
    const double dist = std::abs(d);
    if (dist == 0.0 || a_up <= 0.0 || a_dn <= 0.0) return p;
    const double vp = std::sqrt(2.0 * dist * a_up * a_dn / (a_up + a_dn));
    if (vp <= v_max) {
      p.v_peak = vp;
      p.t_up = vp / a_up;
      p.t_dn = vp / a_dn;
    } else {
      p.v_peak = v_max;
      p.t_up = v_max / a_up;
      p.t_dn = v_max / a_dn;
      const double ramp_dist = 0.5 * v_max * v_max * (1.0 / a_up + 1.0 / a_dn);
      p.t_coast = (dist - ramp_dist) / v_max;
    }
    return p;
  }

  double acc(double t) const {
    if (t < 0.0 || t >= total() || v_peak == 0.0) return 0.0;
    if (t < t_up) return sign * a_up;
    if (t < t_up + t_coast) return 0.0;
    return -sign * a_dn;
  }

  double vel(double t) const {
    if (t <= 0.0 || v_peak == 0.0) return 0.0;
    if (t >= total()) return 0.0;
    if (t < t_up) return sign * a_up * t;
    if (t < t_up + t_coast) return sign * v_peak;
    const double r = total() - t;
    return sign * a_dn * r;
  }

  double pos(double t) const {
    if (t <= 0.0 || v_peak == 0.0) return s0;
    if (t >= total())
      return s0 + sign * (0.5 * v_peak * (t_up + t_dn) + v_peak * t_coast);
    if (t < t_up) return s0 + sign * 0.5 * a_up * t * t;
    if (t < t_up + t_coast)
      return s0 + sign * (0.5 * v_peak * t_up + v_peak * (t - t_up));
    const double r = total() - t;
    return s0 + sign * (0.5 * v_peak * (t_up + t_dn) + v_peak * t_coast - 0.5 * a_dn * r * r);
  }
};

}  // namespace tmm::detail
