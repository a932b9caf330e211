#include "tmm/trajopt.hpp"

#include <algorithm>
#include <cmath>

#include "profile.hpp"

namespace tmm {

namespace {

using Eigen::VectorXd;

SimplifiedState state_at(const VectorXd& x) {
  return {x(0), x(1), x(2), x(3)};
}

/// Full-model ZMP margin at a reduced state on a static base.
double full_margin(const RobotModel& model, const BaseAttitude& att, double g,
                   const SimplifiedState& x, const SimplifiedInput& u, ZmpPoint* zmp_out) {
  const MappedJoints mj = simplified_to_full(model, x, u);
  const LinkKinematics kin = link_kinematics(model, mj.q, mj.qd, mj.qdd);
  // Static base: the inertial CoM accelerations are the joint-induced ones.
  const Vec3 grav = gravity_in_base(att, g);
  const ZmpPoint zmp = zmp_dynamic(model.masses(), kin.p, kin.a, grav);
  if (zmp_out != nullptr) *zmp_out = zmp;
  return contains(model.support_polygon, zmp).margins.margin;
}

double guarded_margin(const RobotModel& model, const BaseAttitude& att, double g,
                      const SimplifiedState& x, const SimplifiedInput& u) {
  try {
    return full_margin(model, att, g, x, u, nullptr);
  } catch (const IkDomain&) {
    return -model.support_polygon.inradius();
  }
}

/// RK4 rollout of the returned inputs at `refine`x the mesh density; the
/// piecewise-linear input interpolant matches the trapezoidal transcription.
bool certify_manipulation(const RobotModel& model, const BaseAttitude& att, double g,
                          const Trajectory& tr, int refine) {
  const int n = static_cast<int>(tr.t.size());
  auto u_at = [&](double t) -> Eigen::Vector2d {
    if (t <= tr.t.front()) return tr.u.front().head<2>();
    if (t >= tr.t.back()) return tr.u.back().head<2>();
    int k = 0;
    while (k + 2 < n && tr.t[k + 1] <= t) ++k;
    const double s = (t - tr.t[k]) / (tr.t[k + 1] - tr.t[k]);
    return (1.0 - s) * tr.u[k].head<2>() + s * tr.u[k + 1].head<2>();
  };
  auto f = [&](double t, const Eigen::Vector4d& x) -> Eigen::Vector4d {
    const Eigen::Vector2d u = u_at(t);
    return {x(1), u(0), x(3), u(1)};
  };
  Eigen::Vector4d x = tr.x.front().head<4>();
  for (int k = 0; k + 1 < n; ++k) {
    const double h = (tr.t[k + 1] - tr.t[k]) / refine;
    for (int i = 0; i < refine; ++i) {
      const double t = tr.t[k] + i * h;
      const Eigen::Vector4d k1 = f(t, x);
      const Eigen::Vector4d k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
      const Eigen::Vector4d k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
      const Eigen::Vector4d k4 = f(t + h, x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const Eigen::Vector2d u = u_at(t + h);
      const double m = guarded_margin(model, att, g, state_at(x), {u(0), u(1)});
      if (m < 0.0) return false;
    }
  }
  return true;
}

Trajectory run_manipulation_solve(const RobotModel& model, const SimplifiedState& x0,
                                  const SimplifiedState& xf, const BaseAttitude& att,
                                  double g, const SimplifiedBounds& b, double margin_req,
                                  int N, const SolveOptions& sopt, const OcpGuess& guess) {
  OcpProblem p;
  p.nx = 4;
  p.nu = 2;
  p.nc = 7;
  p.N = N;
  p.dynamics = [](const VectorXd& x, const VectorXd& u) {
    VectorXd dx(4);
    dx << x(1), u(0), x(3), u(1);
    return dx;
  };
  const double d_min = model.simplified.d_min, d_max = model.simplified.d_max;
  p.path = [&model, &att, g, b, margin_req, d_min, d_max](int, const VectorXd& x,
                                                          const VectorXd& u) {
    VectorXd c(7);
    c(0) = margin_req - guarded_margin(model, att, g, state_at(x), {u(0), u(1)});
    c(1) = x(1) - b.q1_rate;
    c(2) = -x(1) - b.q1_rate;
    c(3) = x(3) - b.d_rate;
    c(4) = -x(3) - b.d_rate;
    c(5) = x(2) - d_max;
    c(6) = d_min - x(2);
    return c;
  };
  p.x0 = (VectorXd(4) << x0.q1, x0.q1_dot, x0.d, x0.d_dot).finished();
  p.xf = (VectorXd(4) << xf.q1, xf.q1_dot, xf.d, xf.d_dot).finished();
  p.xf_mask = VectorXd::Ones(4);
  p.u_lo = (VectorXd(2) << -b.q1_accel, -b.d_accel).finished();
  p.u_hi = -p.u_lo;
  return solve_ocp(p, sopt, &guess);
}

void fill_stability_record(const RobotModel& model, const BaseAttitude& att, double g,
                           Trajectory& tr) {
  const int n = static_cast<int>(tr.t.size());
  tr.zmp_x.resize(n);
  tr.zmp_y.resize(n);
  tr.margin.resize(n);
  for (int k = 0; k < n; ++k) {
    ZmpPoint zmp;
    tr.margin[k] =
        full_margin(model, att, g, state_at(tr.x[k]), {tr.u[k](0), tr.u[k](1)}, &zmp);
    tr.zmp_x[k] = zmp.x;
    tr.zmp_y[k] = zmp.y;
  }
}

}  // namespace

Trajectory solve_manipulation_ocp(const RobotModel& model, const SimplifiedState& x0,
                                  const SimplifiedState& xf, const BaseAttitude& attitude,
                                  double gravity, const ManipulationOptions& opt) {
  const SimplifiedState q0{x0.q1, 0.0, x0.d, 0.0}, q1{xf.q1, 0.0, xf.d, 0.0};
  if (full_margin(model, attitude, gravity, q0, {}, nullptr) <= 0.0 ||
      full_margin(model, attitude, gravity, q1, {}, nullptr) <= 0.0)
    throw Infeasible("manipulation endpoint is quasi-statically unstable");

  if (x0.q1 == xf.q1 && x0.d == xf.d && x0.q1_dot == 0.0 && xf.q1_dot == 0.0 &&
      x0.d_dot == 0.0 && xf.d_dot == 0.0) {
    Trajectory tr;
    tr.t = {0.0};
    tr.x = {(VectorXd(4) << x0.q1, 0.0, x0.d, 0.0).finished()};
    tr.u = {VectorXd::Zero(2)};
    tr.t_f = 0.0;
    tr.status = TrajStatus::Optimal;
    fill_stability_record(model, attitude, gravity, tr);
    return tr;
  }

  const SimplifiedBounds b = tighten_simplified_bounds(model);
  const double margin_req = opt.margin_fraction * model.support_polygon.inradius();

  // Static margin of the straight constant-reach sweep. When the sweep
  // crosses the downhill side the direct profile is hopeless and the solver
  // is seeded with a retract-swing-extend motion instead.
  const auto sweep_margin = [&](double d_level) {
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 50; ++k) {
      const double s = static_cast<double>(k) / 50.0;
      const SimplifiedState xs{x0.q1 + s * (xf.q1 - x0.q1), 0.0, d_level, 0.0};
      worst = std::min(worst, full_margin(model, attitude, gravity, xs, {}, nullptr));
    }
    return worst;
  };
  const double d_lo = model.simplified.d_min;
  const double d_ref = std::min(x0.d, xf.d);
  const bool blocked = sweep_margin(d_ref) < margin_req;

  OcpGuess guess;
  guess.u.resize(opt.N + 1);
  if (!blocked) {
    const auto pq = detail::ScalarProfile::rest_to_rest(x0.q1, xf.q1, b.q1_rate,
                                                        b.q1_accel, b.q1_accel);
    const auto pd =
        detail::ScalarProfile::rest_to_rest(x0.d, xf.d, b.d_rate, b.d_accel, b.d_accel);
    guess.t_f = std::max({pq.total(), pd.total(), 0.1});
    for (int k = 0; k <= opt.N; ++k) {
      const double t = guess.t_f * k / opt.N;
      guess.u[k] = (VectorXd(2) << pq.acc(t), pd.acc(t)).finished();
    }
  } else {
    // largest reach that clears the sweep with a safety factor, else d_min
    double d_safe = d_lo;
    for (int i = 0; i <= 8; ++i) {
      const double dv = d_ref + (d_lo - d_ref) * static_cast<double>(i) / 8.0;
      if (sweep_margin(dv) >= 2.0 * margin_req) {
        d_safe = dv;
        break;
      }
    }
    const auto pa =
        detail::ScalarProfile::rest_to_rest(x0.d, d_safe, b.d_rate, b.d_accel, b.d_accel);
    const auto pb = detail::ScalarProfile::rest_to_rest(x0.q1, xf.q1, b.q1_rate,
                                                        b.q1_accel, b.q1_accel);
    const auto pc =
        detail::ScalarProfile::rest_to_rest(d_safe, xf.d, b.d_rate, b.d_accel, b.d_accel);
    guess.t_f = std::max(pa.total() + pb.total() + pc.total(), 0.1);
    for (int k = 0; k <= opt.N; ++k) {
      const double t = guess.t_f * k / opt.N;
      double uq = 0.0, ud = 0.0;
      if (t < pa.total()) {
        ud = pa.acc(t);
      } else if (t < pa.total() + pb.total()) {
        uq = pb.acc(t - pa.total());
      } else {
        ud = pc.acc(t - pa.total() - pb.total());
      }
      guess.u[k] = (VectorXd(2) << uq, ud).finished();
    }
  }

  Trajectory tr = run_manipulation_solve(model, x0, xf, attitude, gravity, b, margin_req,
                                         opt.N, opt.solver, guess);
  if (!tr.ok()) throw SolverStall("manipulation OCP did not converge");
  if (!certify_manipulation(model, attitude, gravity, tr, 10)) {
    OcpGuess refined;
    refined.t_f = tr.t_f;
    refined.u = tr.u;
    tr = run_manipulation_solve(model, x0, xf, attitude, gravity, b, margin_req, 2 * opt.N,
                                opt.solver, refined);
    if (!tr.ok() || !certify_manipulation(model, attitude, gravity, tr, 10))
      throw SolverStall("manipulation trajectory failed re-simulation certification");
  }
  fill_stability_record(model, attitude, gravity, tr);
  return tr;
}

Trajectory phase_plane_baseline(const RobotModel& model, const Eigen::VectorXd& q0,
                                const Eigen::VectorXd& qf, const JointLimits& limits,
                                const BaseAttitude& attitude, double gravity, int samples) {
  const int n = static_cast<int>(q0.size());
  std::vector<detail::ScalarProfile> prof(n);
  double t_f = 0.0;
  for (int i = 0; i < n; ++i) {
    prof[i] = detail::ScalarProfile::rest_to_rest(q0(i), qf(i), limits.rate, limits.accel,
                                                  limits.accel);
    t_f = std::max(t_f, prof[i].total());
  }

  Trajectory tr;
  tr.t_f = t_f;
  tr.status = TrajStatus::Feasible;
  const int m = t_f == 0.0 ? 1 : samples;
  tr.t.resize(m);
  tr.x.resize(m);
  tr.u.resize(m);
  tr.zmp_x.resize(m);
  tr.zmp_y.resize(m);
  tr.margin.resize(m);
  const Vec3 grav = gravity_in_base(attitude, gravity);
  const std::vector<double> masses = model.masses();
  for (int k = 0; k < m; ++k) {
    const double t = m == 1 ? 0.0 : t_f * k / (m - 1);
    VectorXd q(n), qd(n), qdd(n);
    for (int i = 0; i < n; ++i) {
      q(i) = prof[i].pos(t);
      qd(i) = prof[i].vel(t);
      qdd(i) = prof[i].acc(t);
    }
    tr.t[k] = t;
    tr.x[k] = (VectorXd(2 * n) << q, qd).finished();
    tr.u[k] = qdd;
    const LinkKinematics kin = link_kinematics(model, q, qd, qdd);
    const std::vector<Vec3> acc = link_com_accelerations(model, q, qd, qdd, {});
    const ZmpPoint zmp = zmp_dynamic(masses, kin.p, acc, grav);
    tr.zmp_x[k] = zmp.x;
    tr.zmp_y[k] = zmp.y;
    tr.margin[k] = contains(model.support_polygon, zmp).margins.margin;
  }
  return tr;
}

std::pair<double, double> base_accel_bounds(const std::vector<ZmpPoint>& locus,
                                            const ConvexPolygon& polygon,
                                            const MassAggregates& agg, double g_z) {
  if (locus.empty()) throw EmptyInterval("empty ZMP locus");
  double d_u = std::numeric_limits<double>::infinity();
  double d_l = std::numeric_limits<double>::infinity();
  for (const ZmpPoint& p : locus) {
    const StabilityMargin m = contains(polygon, p).margins;
    d_u = std::min(d_u, m.d_u);
    d_l = std::min(d_l, m.d_l);
  }
  if (d_u <= 0.0 && d_l <= 0.0)
    throw EmptyInterval("ZMP locus touches both longitudinal edges");
  const double scale = agg.M * g_z / agg.Mz;
  return {-d_u * scale, d_l * scale};
}

Trajectory bang_bang_base(double distance, std::pair<double, double> accel_interval,
                          double v_max, int samples) {
  Trajectory tr;
  if (distance == 0.0) {
    tr.t = {0.0};
    tr.x = {Eigen::Vector2d::Zero()};
    tr.u = {VectorXd::Zero(1)};
    tr.t_f = 0.0;
    tr.status = TrajStatus::Optimal;
    return tr;
  }
  // Forward motion accelerates with the upper bound and brakes with the
  // lower one; mirrored for negative distances.
  const double a_up = distance > 0.0 ? accel_interval.second : -accel_interval.first;
  const double a_dn = distance > 0.0 ? -accel_interval.first : accel_interval.second;
  if (a_up <= 0.0 || a_dn <= 0.0)
    throw EmptyInterval("acceleration interval does not allow rest-to-rest motion");
  const auto prof = detail::ScalarProfile::rest_to_rest(0.0, distance, v_max, a_up, a_dn);
  tr.t_f = prof.total();
  tr.status = TrajStatus::Optimal;
  tr.t.resize(samples);
  tr.x.resize(samples);
  tr.u.resize(samples);
  for (int k = 0; k < samples; ++k) {
    const double t = tr.t_f * k / (samples - 1);
    tr.t[k] = t;
    tr.x[k] = Eigen::Vector2d(prof.pos(t), prof.vel(t));
    tr.u[k] = VectorXd::Constant(1, prof.acc(t));
  }
  return tr;
}

}  // namespace tmm
