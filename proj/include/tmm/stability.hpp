#pragma once

#include <stdexcept>
#include <vector>

#include "tmm/geometry.hpp"

namespace tmm {

struct DegenerateDenominator : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StepTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZmpPoint {
  double x = 0.0, y = 0.0;
  Vec2 vec() const { return {x, y}; }
};

/// First mass moments of the machine in F0.
struct MassAggregates {
  double M = 0.0;
  double Mx = 0.0, My = 0.0, Mz = 0.0;

  static MassAggregates from_points(const std::vector<double>& masses,
                                    const std::vector<Vec3>& positions);
};

/// Distances from a ZMP to the front (+y) and rear (-y) polygon edges plus
/// the signed margin to the nearest edge.
struct StabilityMargin {
  double d_u = 0.0;
  double d_l = 0.0;
  double margin = 0.0;
};

struct ArcEnvelope {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  double start_angle = 0.0;  // angular parameter of the current ZMP
  double sweep = 0.0;        // signed traversed angle (equals -psi_t)

  Vec2 point_at(double s) const {  // s in [0, 1]
    const double a = start_angle + s * sweep;
    return center + radius * Vec2(std::cos(a), std::sin(a));
  }
};

struct RectEnvelope {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();
};

struct ZmpEnvelope {
  enum class Kind { Arc, Rectangle } kind = Kind::Arc;
  ArcEnvelope arc;
  RectEnvelope rect;
};

struct ContainsResult {
  bool ok = false;
  StabilityMargin margins;
};

/// ZMP of the full dynamic system, Newton-Euler moment balance about the
/// F0 origin. gravity is g^{F0} = R^T (0, 0, g), so the inertial force on
/// mass i is m_i * (p_ddot_i + g^{F0}).
ZmpPoint zmp_dynamic(const std::vector<double>& masses, const std::vector<Vec3>& positions,
                     const std::vector<Vec3>& accelerations, const Vec3& gravity);

/// Quasi-static ZMP: x = (M_x g_z - M_z g_x) / (M g_z), same for y.
ZmpPoint zmp_quasistatic(const MassAggregates& agg, const Vec3& gravity);

/// During a quasi-static in-place turn of angle psi_t the ZMP stays
/// on an arc centered at the flat-ground ZMP (M_x/M, M_y/M) with radius
/// sqrt(r13^2 + r23^2) * |M_z| / (r33 * M).
ZmpEnvelope turn_envelope(const MassAggregates& agg, const Mat3& attitude, double psi_t);

/// During a monotone pitch/roll ramp between two attitudes
/// the ZMP stays inside the axis-aligned rectangle with opposite corners at
/// the endpoint quasi-static ZMPs, inflated for second-order effects.
/// Throws StepTooLarge when the attitude change exceeds step_cap.
ZmpEnvelope relocation_envelope(const MassAggregates& agg, const Mat3& attitude_a,
                                const Mat3& attitude_b, double g, double inflation,
                                double step_cap = 5.0 * M_PI / 180.0);

ContainsResult contains(const ConvexPolygon& polygon, const ZmpPoint& p, double margin = 0.0);
ContainsResult contains(const ConvexPolygon& polygon, const ZmpEnvelope& env, double margin = 0.0);

/// Analytic bounds on the dynamic ZMP deviation from the static ZMP for the
/// straight-segment and turn-in-place primitives.
struct DeviationBounds {
  double forward = 0.0;
  double turn = 0.0;
};

DeviationBounds dynamic_deviation_bounds(const std::vector<double>& masses,
                                         const std::vector<Vec3>& positions, double g_z,
                                         double u_a, double psi_dot, double u_psi);

}  // namespace tmm
