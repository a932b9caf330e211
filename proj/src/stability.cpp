#include "tmm/stability.hpp"

#include <algorithm>
#include <cmath>

namespace tmm {

MassAggregates MassAggregates::from_points(const std::vector<double>& masses,
                                           const std::vector<Vec3>& positions) {
  MassAggregates a;
  for (size_t i = 0; i < masses.size(); ++i) {
    a.M += masses[i];
    a.Mx += masses[i] * positions[i].x();
    a.My += masses[i] * positions[i].y();
    a.Mz += masses[i] * positions[i].z();
  }
  return a;
}

ZmpPoint zmp_dynamic(const std::vector<double>& masses, const std::vector<Vec3>& positions,
                     const std::vector<Vec3>& accelerations, const Vec3& gravity) {
  double den = 0.0, num_x = 0.0, num_y = 0.0, mass_sum = 0.0;
  for (size_t i = 0; i < masses.size(); ++i) {
    const double m = masses[i];
    const Vec3& p = positions[i];
    const Vec3& a = accelerations[i];
    const double fz = m * (a.z() + gravity.z());
    den += fz;
    num_x += fz * p.x() - m * (a.x() + gravity.x()) * p.z();
    num_y += fz * p.y() - m * (a.y() + gravity.y()) * p.z();
    mass_sum += m;
  }
  if (std::abs(den) < 1e-6 * mass_sum * gravity.norm())
    throw DegenerateDenominator("zmp_dynamic: net vertical force near zero");
  return {num_x / den, num_y / den};
}

ZmpPoint zmp_quasistatic(const MassAggregates& agg, const Vec3& gravity) {
  const double d = agg.M * gravity.z();
  return {(agg.Mx * gravity.z() - agg.Mz * gravity.x()) / d,
          (agg.My * gravity.z() - agg.Mz * gravity.y()) / d};
}

ZmpEnvelope turn_envelope(const MassAggregates& agg, const Mat3& attitude, double psi_t) {
  // Gravity direction in the base frame is the third row of the (body to
  // inertial) attitude matrix.
  const double r13 = attitude(2, 0), r23 = attitude(2, 1), r33 = attitude(2, 2);
  ZmpEnvelope env;
  env.kind = ZmpEnvelope::Kind::Arc;
  env.arc.center = Vec2(agg.Mx / agg.M, agg.My / agg.M);
  const Vec2 v0(-r13 * agg.Mz / (r33 * agg.M), -r23 * agg.Mz / (r33 * agg.M));
  env.arc.radius = v0.norm();
  env.arc.start_angle = env.arc.radius > 0.0 ? std::atan2(v0.y(), v0.x()) : 0.0;
  // Turning by psi rotates the gravity tangent components by -psi, so the
  // arc parameter runs backwards relative to the turn angle.
  env.arc.sweep = -psi_t;
  return env;
}

namespace {

// Solves A*cos(t) + B*sin(t) = C for the solution nearest zero.
double solve_trig(double A, double B, double C, const char* what) {
  const double R = std::hypot(A, B);
  if (R < 1e-12) {
    if (std::abs(C) < 1e-9) return 0.0;
    throw StepTooLarge(std::string("relocation_envelope: no attitude ramp solves ") + what);
  }
  double ratio = C / R;
  if (std::abs(ratio) > 1.0 + 1e-9)
    throw StepTooLarge(std::string("relocation_envelope: no attitude ramp solves ") + what);
  ratio = std::clamp(ratio, -1.0, 1.0);
  const double base = std::atan2(B, A);
  const double off = std::acos(ratio);
  const double t1 = wrap_angle(base + off);
  const double t2 = wrap_angle(base - off);
  return std::abs(t1) <= std::abs(t2) ? t1 : t2;
}

// Max of cos(a - beta) for a in [lo, hi].
double max_cos_over(double lo, double hi, double beta) {
  const double two_pi = 2.0 * M_PI;
  double k = std::ceil((lo - beta) / two_pi);
  if (beta + k * two_pi <= hi) return 1.0;
  return std::max(std::cos(lo - beta), std::cos(hi - beta));
}

}  // namespace

ZmpEnvelope relocation_envelope(const MassAggregates& agg, const Mat3& attitude_a,
                                const Mat3& attitude_b, double g, double inflation,
                                double step_cap) {
  const Vec3 ua = attitude_a.transpose() * Vec3::UnitZ();
  const Vec3 ub = attitude_b.transpose() * Vec3::UnitZ();

  // The ramp applies an extra pitch theta_r then roll phi_r in the body
  // frame: u_b = Ry(phi)^T Rx(theta)^T u_a. Component 2 fixes theta, then
  // component 1 fixes phi.
  const double theta_r = solve_trig(ua.y(), ua.z(), ub.y(), "pitch step");
  const double ct = std::cos(theta_r), st = std::sin(theta_r);
  const double w3 = -st * ua.y() + ct * ua.z();
  const double phi_r = solve_trig(ua.x(), -w3, ub.x(), "roll step");
  if (std::abs(theta_r) > step_cap || std::abs(phi_r) > step_cap)
    throw StepTooLarge("relocation_envelope: pitch/roll step exceeds cap");

  const ZmpPoint za = zmp_quasistatic(agg, g * ua);
  const ZmpPoint zb = zmp_quasistatic(agg, g * ub);

  ZmpEnvelope env;
  env.kind = ZmpEnvelope::Kind::Rectangle;
  env.rect.lo = Vec2(std::min(za.x, zb.x) - inflation, std::min(za.y, zb.y) - inflation);
  env.rect.hi = Vec2(std::max(za.x, zb.x) + inflation, std::max(za.y, zb.y) + inflation);
  return env;
}

ContainsResult contains(const ConvexPolygon& polygon, const ZmpPoint& p, double margin) {
  ContainsResult r;
  r.margins.margin = polygon.signed_margin(p.vec());
  r.margins.d_u = polygon.max_y() - p.y;
  r.margins.d_l = p.y - polygon.min_y();
  r.ok = r.margins.margin > margin;
  return r;
}

ContainsResult contains(const ConvexPolygon& polygon, const ZmpEnvelope& env, double margin) {
  ContainsResult r;
  double worst = std::numeric_limits<double>::infinity();
  double y_max, y_min;
  if (env.kind == ZmpEnvelope::Kind::Rectangle) {
    const Vec2 corners[4] = {env.rect.lo,
                             {env.rect.hi.x(), env.rect.lo.y()},
                             {env.rect.lo.x(), env.rect.hi.y()},
                             env.rect.hi};
    for (const Vec2& c : corners) worst = std::min(worst, polygon.signed_margin(c));
    y_max = env.rect.hi.y();
    y_min = env.rect.lo.y();
  } else {
    const double lo = std::min(env.arc.start_angle, env.arc.start_angle + env.arc.sweep);
    const double hi = std::max(env.arc.start_angle, env.arc.start_angle + env.arc.sweep);
    for (int i = 0; i < polygon.num_edges(); ++i) {
      const Vec2& n = polygon.edge_normal(i);
      const double beta = std::atan2(n.y(), n.x());
      const double peak = n.dot(env.arc.center) + env.arc.radius * max_cos_over(lo, hi, beta);
      worst = std::min(worst, polygon.edge_offset(i) - peak);
    }
    y_max = env.arc.center.y() + env.arc.radius * max_cos_over(lo, hi, M_PI / 2.0);
    y_min = env.arc.center.y() - env.arc.radius * max_cos_over(lo, hi, -M_PI / 2.0);
  }
  r.margins.margin = worst;
  r.margins.d_u = polygon.max_y() - y_max;
  r.margins.d_l = y_min - polygon.min_y();
  r.ok = worst > margin;
  return r;
}

DeviationBounds dynamic_deviation_bounds(const std::vector<double>& masses,
                                         const std::vector<Vec3>& positions, double g_z,
                                         double u_a, double psi_dot, double u_psi) {
  double M = 0.0, Mz = 0.0, mz_sq = 0.0, xy_sum = 0.0;
  for (size_t i = 0; i < masses.size(); ++i) {
    M += masses[i];
    Mz += masses[i] * positions[i].z();
    mz_sq += masses[i] * positions[i].z() * masses[i] * positions[i].z();
    xy_sum += std::abs(positions[i].x()) + std::abs(positions[i].y());
  }
  DeviationBounds b;
  b.forward = std::abs(Mz / (M * g_z)) * std::abs(u_a);
  b.turn = 2.0 * std::sqrt(mz_sq) / (M * g_z) * xy_sum * (psi_dot * psi_dot + std::abs(u_psi));
  return b;
}

}  // namespace tmm
