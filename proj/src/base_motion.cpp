#include "tmm/base_motion.hpp"

#include <algorithm>
#include <cmath>

#include "profile.hpp"

namespace tmm {

namespace {

using Eigen::VectorXd;

/// Everything about the frozen-arm machine a segment solve needs.
struct FrozenArm {
  std::vector<double> masses;
  std::vector<Vec3> positions;
  MassAggregates agg;
  VectorXd zero;

  FrozenArm(const RobotModel& model, const VectorXd& q)
      : masses(model.masses()),
        positions(link_com_positions(model, q)),
        agg(MassAggregates::from_points(masses, positions)),
        zero(VectorXd::Zero(q.size())) {}
};

double segment_margin(const RobotModel& model, const TerrainModel& terrain,
                      const FrozenArm& arm, const VectorXd& q, const VectorXd& x,
                      const VectorXd& u) {
  BaseAttitude att;
  try {
    att = terrain.base_attitude(x(0), x(1), x(3));
  } catch (const OutOfBounds&) {
    return -model.support_polygon.inradius();
  }
  const Vec3 grav = gravity_in_base(att, terrain.gravity_magnitude());
  BaseMotion bm;
  bm.omega = Vec3(0.0, 0.0, x(4));
  bm.alpha = Vec3(0.0, 0.0, u(1));
  bm.a_origin = Vec3(-x(2) * x(4), u(0), 0.0);
  const std::vector<Vec3> acc =
      link_com_accelerations(model, q, arm.zero, arm.zero, bm);
  const ZmpPoint zmp = zmp_dynamic(arm.masses, arm.positions, acc, grav);
  return contains(model.support_polygon, zmp).margins.margin;
}

void fill_segment_record(const RobotModel& model, const TerrainModel& terrain,
                         const FrozenArm& arm, const VectorXd& q, Trajectory& tr) {
  const int n = static_cast<int>(tr.t.size());
  tr.zmp_x.resize(n);
  tr.zmp_y.resize(n);
  tr.margin.resize(n);
  for (int k = 0; k < n; ++k) {
    BaseAttitude att;
    try {
      att = terrain.base_attitude(tr.x[k](0), tr.x[k](1), tr.x[k](3));
    } catch (const OutOfBounds&) {
      tr.margin[k] = -model.support_polygon.inradius();
      tr.zmp_x[k] = tr.zmp_y[k] = 0.0;
      continue;
    }
    const Vec3 grav = gravity_in_base(att, terrain.gravity_magnitude());
    BaseMotion bm;
    bm.omega = Vec3(0.0, 0.0, tr.x[k](4));
    bm.alpha = Vec3(0.0, 0.0, tr.u[k](1));
    bm.a_origin = Vec3(-tr.x[k](2) * tr.x[k](4), tr.u[k](0), 0.0);
    const std::vector<Vec3> acc =
        link_com_accelerations(model, q, arm.zero, arm.zero, bm);
    const ZmpPoint zmp = zmp_dynamic(arm.masses, arm.positions, acc, grav);
    tr.zmp_x[k] = zmp.x;
    tr.zmp_y[k] = zmp.y;
    tr.margin[k] = contains(model.support_polygon, zmp).margins.margin;
  }
}

/// Worst quasi-static margin and smallest g_z over the straight slide.
void static_sweep(const RobotModel& model, const TerrainModel& terrain, const FrozenArm& arm,
                  const Vec2& a, const Vec2& b, double heading, double* margin_min,
                  double* gz_min) {
  *margin_min = std::numeric_limits<double>::infinity();
  *gz_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 100; ++k) {
    const Vec2 p = a + (b - a) * (k / 100.0);
    BaseAttitude att;
    try {
      att = terrain.base_attitude(p.x(), p.y(), heading);
    } catch (const OutOfBounds&) {
      *margin_min = -model.support_polygon.inradius();
      return;
    }
    const Vec3 grav = gravity_in_base(att, terrain.gravity_magnitude());
    const ZmpPoint zmp = zmp_quasistatic(arm.agg, grav);
    *margin_min = std::min(*margin_min, contains(model.support_polygon, zmp).margins.margin);
    *gz_min = std::min(*gz_min, grav.z());
  }
}

Trajectory single_node(const VectorXd& x) {
  Trajectory tr;
  tr.t = {0.0};
  tr.x = {x};
  tr.u = {VectorXd::Zero(2)};
  tr.t_f = 0.0;
  tr.status = TrajStatus::Optimal;
  return tr;
}

/// Quasi-static slide time-scaled through the forward deviation bound.
Trajectory fallback_slide(const RobotModel& model, const TerrainModel& terrain,
                          const FrozenArm& arm, const VectorXd& q, const Vec2& a,
                          const Vec2& b, double heading, double margin_min, double gz_min,
                          int samples) {
  const double a_bound =
      0.9 * margin_min * arm.agg.M * gz_min / std::abs(arm.agg.Mz);
  const double a_lim = std::min(model.base_limits.u_a, a_bound);
  const double dist = (b - a).norm();
  const auto prof = detail::ScalarProfile::rest_to_rest(0.0, dist, model.base_limits.v_max,
                                                        a_lim, a_lim);
  Trajectory tr;
  tr.t_f = prof.total();
  tr.status = TrajStatus::Feasible;
  const Vec2 dir = (b - a) / dist;
  tr.t.resize(samples);
  tr.x.resize(samples);
  tr.u.resize(samples);
  for (int k = 0; k < samples; ++k) {
    const double t = tr.t_f * k / (samples - 1);
    const Vec2 p = a + dir * prof.pos(t);
    tr.t[k] = t;
    tr.x[k] = (VectorXd(5) << p.x(), p.y(), prof.vel(t), heading, 0.0).finished();
    tr.u[k] = (VectorXd(2) << prof.acc(t), 0.0).finished();
  }
  fill_segment_record(model, terrain, arm, q, tr);
  return tr;
}

}  // namespace

Trajectory solve_segment_ocp(const RobotModel& model, const TerrainModel& terrain,
                             const Vec2& a, const Vec2& b, double heading,
                             const Eigen::VectorXd& q, const SegmentOptions& opt) {
  const double dist = (b - a).norm();
  if (dist < 1e-12)
    return single_node((VectorXd(5) << a.x(), a.y(), 0.0, heading, 0.0).finished());

  const FrozenArm arm(model, q);
  double margin_min = 0.0, gz_min = 0.0;
  static_sweep(model, terrain, arm, a, b, heading, &margin_min, &gz_min);
  const double margin_req = opt.margin_fraction * model.support_polygon.inradius();
  if (margin_min <= 0.0) throw Infeasible("segment has no quasi-static margin");

  OcpProblem p;
  p.nx = 5;
  p.nu = 2;
  p.nc = 5;
  p.N = opt.N;
  p.dynamics = [&](const VectorXd& x, const VectorXd& u) {
    double cx, cy;
    try {
      const BaseAttitude att = terrain.base_attitude(x(0), x(1), x(3));
      cx = att.R(0, 1);
      cy = att.R(1, 1);
    } catch (const OutOfBounds&) {
      cx = -std::sin(x(3));
      cy = std::cos(x(3));
    }
    VectorXd dx(5);
    dx << x(2) * cx, x(2) * cy, u(0), x(4), u(1);
    return dx;
  };
  const BaseLimits& bl = model.base_limits;
  p.path = [&, margin_req](int, const VectorXd& x, const VectorXd& u) {
    VectorXd c(5);
    c(0) = margin_req - segment_margin(model, terrain, arm, q, x, u);
    c(1) = x(2) - bl.v_max;
    c(2) = bl.v_min - x(2);
    c(3) = x(4) - bl.psi_dot;
    c(4) = -x(4) - bl.psi_dot;
    return c;
  };
  p.x0 = (VectorXd(5) << a.x(), a.y(), 0.0, heading, 0.0).finished();
  p.xf = (VectorXd(5) << b.x(), b.y(), 0.0, heading, 0.0).finished();
  p.xf_mask = VectorXd::Ones(5);
  p.u_lo = (VectorXd(2) << -bl.u_a, -bl.u_psi).finished();
  p.u_hi = -p.u_lo;

  // Warm start at the largest acceleration the deviation bound allows.
  const double a_ws = std::min(
      bl.u_a, std::max(0.05, 0.9 * (margin_min - margin_req) * arm.agg.M * gz_min /
                                 std::abs(arm.agg.Mz)));
  const auto prof = detail::ScalarProfile::rest_to_rest(0.0, dist, bl.v_max, a_ws, a_ws);
  OcpGuess guess;
  guess.t_f = prof.total();
  guess.u.resize(opt.N + 1);
  for (int k = 0; k <= opt.N; ++k) {
    const double t = guess.t_f * k / opt.N;
    guess.u[k] = (VectorXd(2) << prof.acc(t), 0.0).finished();
  }

  Trajectory tr = solve_ocp(p, opt.solver, &guess);
  if (!tr.ok())
    return fallback_slide(model, terrain, arm, q, a, b, heading,
                          std::max(1e-3, margin_min - margin_req), gz_min, 2 * opt.N + 1);
  fill_segment_record(model, terrain, arm, q, tr);
  return tr;
}

Trajectory turn_in_place(const RobotModel& model, const TerrainModel& terrain,
                         const Vec2& position, const Eigen::VectorXd& q, double psi_from,
                         double sweep, int samples) {
  if (std::abs(sweep) < 1e-12)
    return single_node(
        (VectorXd(5) << position.x(), position.y(), 0.0, psi_from, 0.0).finished());

  const FrozenArm arm(model, q);
  const BaseLimits& bl = model.base_limits;
  for (int round = 0; round < 20; ++round) {
    const double s = std::pow(0.8, round);
    const auto prof = detail::ScalarProfile::rest_to_rest(
        psi_from, psi_from + sweep, s * bl.psi_dot, s * s * bl.u_psi, s * s * bl.u_psi);
    bool ok = true;
    for (int k = 0; k < samples && ok; ++k) {
      const double t = prof.total() * k / (samples - 1);
      const VectorXd x =
          (VectorXd(5) << position.x(), position.y(), 0.0, prof.pos(t), prof.vel(t))
              .finished();
      const VectorXd u = (VectorXd(2) << 0.0, prof.acc(t)).finished();
      ok = segment_margin(model, terrain, arm, q, x, u) >= 0.0;
    }
    if (!ok) continue;
    Trajectory tr;
    tr.t_f = prof.total();
    tr.status = round == 0 ? TrajStatus::Optimal : TrajStatus::Feasible;
    tr.t.resize(samples);
    tr.x.resize(samples);
    tr.u.resize(samples);
    for (int k = 0; k < samples; ++k) {
      const double t = tr.t_f * k / (samples - 1);
      tr.t[k] = t;
      tr.x[k] = (VectorXd(5) << position.x(), position.y(), 0.0, prof.pos(t), prof.vel(t))
                    .finished();
      tr.u[k] = (VectorXd(2) << 0.0, prof.acc(t)).finished();
    }
    fill_segment_record(model, terrain, arm, q, tr);
    return tr;
  }
  throw Infeasible("in-place turn unstable even when slowed");
}

double total_time(const std::vector<BaseSegment>& segments) {
  double t = 0.0;
  for (const auto& s : segments) t += s.traj.t_f;
  return t;
}

namespace {

/// Zero-order-hold input lookup over a chain of trajectories.
VectorXd window_input(const std::vector<const Trajectory*>& chain, double t) {
  for (const Trajectory* tr : chain) {
    if (t <= tr->t_f || tr == chain.back()) {
      const int n = static_cast<int>(tr->t.size());
      if (n <= 1 || tr->t_f <= 0.0) return VectorXd::Zero(2);
      const double tc = std::clamp(t, 0.0, tr->t_f);
      const int k = std::min(n - 1, static_cast<int>(tc / tr->t_f * (n - 1)));
      return tr->u[k];
    }
    t -= tr->t_f;
  }
  return VectorXd::Zero(2);
}

}  // namespace

std::vector<BaseSegment> receding_horizon_smooth(const RobotModel& model,
                                                 const TerrainModel& terrain,
                                                 const std::vector<BaseSegment>& segments,
                                                 int horizon, const SegmentOptions& opt) {
  std::vector<BaseSegment> out;
  const int n = static_cast<int>(segments.size());
  int i = 0;
  while (i < n) {
    auto same_q = [](const VectorXd& a, const VectorXd& b) {
      return a.size() == b.size() && (a - b).lpNorm<Eigen::Infinity>() == 0.0;
    };
    const bool window = i + 2 < n && !segments[i].is_turn && segments[i + 1].is_turn &&
                        !segments[i + 2].is_turn &&
                        same_q(segments[i].q, segments[i + 1].q) &&
                        same_q(segments[i].q, segments[i + 2].q) &&
                        segments[i].traj.t.size() > 1 && segments[i + 2].traj.t.size() > 1;
    if (window) {
      const Trajectory& s1 = segments[i].traj;
      const Trajectory& s2 = segments[i + 2].traj;
      const VectorXd x0 = s1.x.front();
      const VectorXd xf = s2.x.back();
      const Vec2 junction(s1.x.back()(0), s1.x.back()(1));
      const double t_orig = s1.t_f + segments[i + 1].traj.t_f + s2.t_f;
      const FrozenArm arm(model, segments[i].q);
      const double margin_req = opt.margin_fraction * model.support_polygon.inradius();
      const BaseLimits& bl = model.base_limits;
      const double tol = 0.5;  // waypoint ball radius at the junction, m

      OcpProblem p;
      p.nx = 5;
      p.nu = 2;
      p.nc = 6;
      p.N = horizon;
      p.dynamics = [&](const VectorXd& x, const VectorXd& u) {
        double cx, cy;
        try {
          const BaseAttitude att = terrain.base_attitude(x(0), x(1), x(3));
          cx = att.R(0, 1);
          cy = att.R(1, 1);
        } catch (const OutOfBounds&) {
          cx = -std::sin(x(3));
          cy = std::cos(x(3));
        }
        VectorXd dx(5);
        dx << x(2) * cx, x(2) * cy, u(0), x(4), u(1);
        return dx;
      };
      const VectorXd& qarm = segments[i].q;
      p.path = [&, margin_req](int k, const VectorXd& x, const VectorXd& u) {
        VectorXd c(6);
        c(0) = margin_req - segment_margin(model, terrain, arm, qarm, x, u);
        c(1) = x(2) - bl.v_max;
        c(2) = bl.v_min - x(2);
        c(3) = x(4) - bl.psi_dot;
        c(4) = -x(4) - bl.psi_dot;
        c(5) = k == p.N / 2
                   ? (Vec2(x(0), x(1)) - junction).squaredNorm() - tol * tol
                   : -1.0;
        return c;
      };
      p.x0 = x0;
      p.xf = xf;
      p.xf_mask = VectorXd::Ones(5);
      p.u_lo = (VectorXd(2) << -bl.u_a, -bl.u_psi).finished();
      p.u_hi = -p.u_lo;

      std::vector<const Trajectory*> chain{&s1, &segments[i + 1].traj, &s2};
      OcpGuess guess;
      guess.t_f = t_orig;
      guess.u.resize(horizon + 1);
      for (int k = 0; k <= horizon; ++k)
        guess.u[k] = window_input(chain, t_orig * k / horizon);

      Trajectory merged = solve_ocp(p, opt.solver, &guess);
      if (merged.ok() && merged.t_f < t_orig - 1e-9) {
        fill_segment_record(model, terrain, arm, qarm, merged);
        bool interior_ok = true;
        for (double m : merged.margin) interior_ok = interior_ok && m >= 0.0;
        if (interior_ok) {
          out.push_back({std::move(merged), segments[i].q, false});
          i += 3;
          continue;
        }
      }
    }
    out.push_back(segments[i]);
    ++i;
  }
  return out;
}

}  // namespace tmm
