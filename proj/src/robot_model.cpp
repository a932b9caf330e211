#include "tmm/robot_model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace tmm {

using json = nlohmann::json;

namespace {

Mat3 rot_x(double a) {
  Mat3 r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}

Mat3 rot_y(double a) {
  Mat3 r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}

Mat3 rot_z(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

/// Frame state propagated down the chain: pose plus velocity/acceleration
/// of the frame (relative to the base, expressed in F0).
struct FrameState {
  Mat3 R = Mat3::Identity();
  Vec3 o = Vec3::Zero();   // frame origin
  Vec3 w = Vec3::Zero();   // angular velocity
  Vec3 al = Vec3::Zero();  // angular acceleration
  Vec3 vo = Vec3::Zero();  // linear velocity of the origin
  Vec3 ao = Vec3::Zero();  // linear acceleration of the origin

  void fixed_rotation(const Mat3& rc) { R = R * rc; }

  void fixed_translation(const Vec3& t_local) {
    const Vec3 s = R * t_local;
    o += s;
    vo += w.cross(s);
    ao += al.cross(s) + w.cross(w.cross(s));
  }

  void joint_rotation(const Vec3& axis_local, double q, double qd, double qdd) {
    const Vec3 u = R * axis_local;
    al += qdd * u + w.cross(qd * u);
    w += qd * u;
    if (axis_local.x() != 0.0)
      R = R * rot_x(q * axis_local.x());
    else
      R = R * rot_z(q * axis_local.z());
  }

  Vec3 point(const Vec3& t_local) const { return o + R * t_local; }
  Vec3 point_v(const Vec3& t_local) const { return vo + w.cross(R * t_local); }
  Vec3 point_a(const Vec3& t_local) const {
    const Vec3 s = R * t_local;
    return ao + al.cross(s) + w.cross(w.cross(s));
  }
};

void apply_dh_row(FrameState& f, const DhRow& row, double q, double qd, double qdd) {
  switch (row.joint) {
    case DhRow::Joint::Theta:
      if (row.theta != 0.0) f.fixed_rotation(rot_z(row.theta));
      f.joint_rotation(Vec3::UnitZ(), q, qd, qdd);
      break;
    case DhRow::Joint::Alpha:
    case DhRow::Joint::Fixed:
      if (row.theta != 0.0) f.fixed_rotation(rot_z(row.theta));
      break;
  }
  if (row.d != 0.0) f.fixed_translation(Vec3(0, 0, row.d));
  if (row.a != 0.0) f.fixed_translation(Vec3(row.a, 0, 0));
  if (row.alpha != 0.0) f.fixed_rotation(rot_x(row.alpha));
  if (row.joint == DhRow::Joint::Alpha) f.joint_rotation(Vec3::UnitX(), q, qd, qdd);
}

}  // namespace

std::vector<double> RobotModel::masses() const {
  std::vector<double> m;
  m.reserve(num_masses());
  for (const auto& l : links) m.push_back(l.mass);
  if (payload) m.push_back(payload->mass);
  return m;
}

double RobotModel::total_mass() const {
  double s = 0;
  for (const auto& l : links) s += l.mass;
  if (payload) s += payload->mass;
  return s;
}

LinkKinematics link_kinematics(const RobotModel& model, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& qd, const Eigen::VectorXd& qdd) {
  const int n = model.num_joints();
  LinkKinematics out;
  out.p.resize(model.num_masses());
  out.v.resize(model.num_masses());
  out.a.resize(model.num_masses());

  // Frame 0 is F0 itself; link masses attached there do not move relative
  // to the base.
  std::vector<FrameState> frames(n + 1);
  frames[0].o = model.mount;
  for (int i = 0; i < n; ++i) {
    frames[i + 1] = frames[i];
    apply_dh_row(frames[i + 1], model.dh[i], q(i), qd.size() ? qd(i) : 0.0,
                 qdd.size() ? qdd(i) : 0.0);
  }

  for (size_t k = 0; k < model.links.size(); ++k) {
    const LinkMass& lm = model.links[k];
    if (lm.frame == 0) {
      out.p[k] = lm.com_offset;
      out.v[k] = Vec3::Zero();
      out.a[k] = Vec3::Zero();
    } else {
      const FrameState& f = frames[lm.frame];
      out.p[k] = f.point(lm.com_offset);
      out.v[k] = f.point_v(lm.com_offset);
      out.a[k] = f.point_a(lm.com_offset);
    }
  }
  const FrameState& ee = frames[n];
  out.ee_origin = ee.o;
  out.ee_v = ee.vo;
  out.ee_a = ee.ao;
  if (model.payload) {
    // Offset fixed in F0 axes: the payload point translates with the
    // end-effector origin.
    out.p.back() = ee.o + model.payload->offset_f0;
    out.v.back() = ee.vo;
    out.a.back() = ee.ao;
  }
  return out;
}

std::vector<Vec3> link_com_positions(const RobotModel& model, const Eigen::VectorXd& q) {
  static const Eigen::VectorXd empty;
  return link_kinematics(model, q, empty, empty).p;
}

std::vector<Vec3> link_com_accelerations(const RobotModel& model, const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& qd, const Eigen::VectorXd& qdd,
                                         const BaseMotion& base) {
  LinkKinematics k = link_kinematics(model, q, qd, qdd);
  std::vector<Vec3> acc(k.p.size());
  for (size_t i = 0; i < k.p.size(); ++i) {
    acc[i] = base.a_origin + base.alpha.cross(k.p[i]) + base.omega.cross(base.omega.cross(k.p[i])) +
             2.0 * base.omega.cross(k.v[i]) + k.a[i];
  }
  return acc;
}

Mat3 rotation_zxy(double psi, double theta, double phi) {
  return rot_z(psi) * rot_x(theta) * rot_y(phi);
}

BaseMotion base_motion_from_euler(double psi, double theta, double phi, double psi_d,
                                  double theta_d, double phi_d, double psi_dd, double theta_dd,
                                  double phi_dd, const Vec3& pb_ddot_inertial) {
  // Body-frame axes of the successive Euler rotations:
  //   yaw about z (pre-rotations Rx(theta)Ry(phi) still to come),
  //   pitch about x (Ry(phi) still to come), roll about y (body axis).
  const Mat3 ry_t = rot_y(phi).transpose();
  const Mat3 rx_t = rot_x(theta).transpose();
  const Vec3 b_psi = ry_t * (rx_t * Vec3::UnitZ());
  const Vec3 b_theta = ry_t * Vec3::UnitX();
  const Vec3 b_phi = Vec3::UnitY();

  // Time derivatives of the axis vectors (theta and phi vary).
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  // b_psi = Ry(phi)^T * (0, sin(theta), cos(theta))^T = (-sp*ct, st, cp*ct)
  const Vec3 db_psi_dtheta(sp * st, ct, -cp * st);
  const Vec3 db_psi_dphi(-cp * ct, 0.0, -sp * ct);
  // b_theta = Ry(phi)^T * x_hat = (cp, 0, sp)
  const Vec3 db_theta_dphi(-sp, 0.0, cp);

  BaseMotion m;
  m.omega = psi_d * b_psi + theta_d * b_theta + phi_d * b_phi;
  m.alpha = psi_dd * b_psi + theta_dd * b_theta + phi_dd * b_phi +
            psi_d * (db_psi_dtheta * theta_d + db_psi_dphi * phi_d) +
            theta_d * (db_theta_dphi * phi_d);
  m.a_origin = rotation_zxy(psi, theta, phi).transpose() * pb_ddot_inertial;
  return m;
}

MappedJoints simplified_to_full(const RobotModel& model, const SimplifiedState& x,
                                const SimplifiedInput& u) {
  const double l2 = model.simplified.l2;
  const double ratio = -x.d / (2.0 * l2);
  if (std::abs(x.d) >= 2.0 * l2) throw IkDomain("reach |d| >= 2*l2");
  const double q2 = std::asin(ratio);
  const double c = std::sqrt(1.0 - ratio * ratio);
  const double q2_d = -x.d_dot / (2.0 * l2 * c);
  const double q2_dd = -u.u_d / (2.0 * l2 * c) -
                       x.d * x.d_dot * x.d_dot / (8.0 * l2 * l2 * l2 * c * c * c);

  MappedJoints m;
  m.q.resize(5);
  m.qd.resize(5);
  m.qdd.resize(5);
  m.q << x.q1, q2, -M_PI - 2.0 * q2, M_PI / 2.0 + q2, model.simplified.q5;
  m.qd << x.q1_dot, q2_d, -2.0 * q2_d, q2_d, 0.0;
  m.qdd << u.u_q1, q2_dd, -2.0 * q2_dd, q2_dd, 0.0;
  return m;
}

SimplifiedBounds tighten_simplified_bounds(const RobotModel& model, int max_rounds) {
  const JointLimits& jl = model.joint_limits;
  SimplifiedBounds b{jl.rate, jl.accel, jl.rate * 2.0 * model.simplified.l2,
                     jl.accel * 2.0 * model.simplified.l2, 0};
  const int nd = 9, nv = 9;
  auto feasible = [&](double d_rate, double d_accel) {
    for (int i = 0; i <= nd; ++i) {
      const double d = model.simplified.d_min +
                       (model.simplified.d_max - model.simplified.d_min) * i / nd;
      for (int j = 0; j <= nv; ++j) {
        const double dd = -d_rate + 2.0 * d_rate * j / nv;
        for (double ud : {-d_accel, 0.0, d_accel}) {
          SimplifiedState x{0, 0, d, dd};
          MappedJoints m = simplified_to_full(model, x, SimplifiedInput{0, ud});
          for (int k = 1; k < 5; ++k) {
            if (std::abs(m.qd(k)) > jl.rate + 1e-12) return false;
            if (std::abs(m.qdd(k)) > jl.accel + 1e-12) return false;
          }
        }
      }
    }
    return true;
  };
  while (b.tightening_rounds < max_rounds && !feasible(b.d_rate, b.d_accel)) {
    b.d_rate *= 0.9;
    b.d_accel *= 0.9;
    ++b.tightening_rounds;
  }
  return b;
}

FullState kinematics_rhs(const RobotModel& model, const TerrainModel& terrain,
                         const FullState& x, const FullInput& u) {
  const BaseAttitude att = terrain.base_attitude(x.x, x.y, x.heading);
  FullState dx;
  dx.x = x.v * att.R(0, 1);  // advance along the heading column r2
  dx.y = x.v * att.R(1, 1);
  dx.heading = x.heading_rate;
  dx.v = u.u_a;
  dx.heading_rate = u.u_psi;
  dx.q = x.qd;
  dx.qd = u.u_q;
  return dx;
}

FullState rk4_step(const RobotModel& model, const TerrainModel& terrain, const FullState& x,
                   const FullInput& u, double dt) {
  auto add = [](const FullState& a, const FullState& b, double s) {
    FullState r = a;
    r.x += s * b.x;
    r.y += s * b.y;
    r.heading += s * b.heading;
    r.v += s * b.v;
    r.heading_rate += s * b.heading_rate;
    if (a.q.size()) r.q = a.q + s * b.q;
    if (a.qd.size()) r.qd = a.qd + s * b.qd;
    return r;
  };
  const FullState k1 = kinematics_rhs(model, terrain, x, u);
  const FullState k2 = kinematics_rhs(model, terrain, add(x, k1, dt / 2), u);
  const FullState k3 = kinematics_rhs(model, terrain, add(x, k2, dt / 2), u);
  const FullState k4 = kinematics_rhs(model, terrain, add(x, k3, dt), u);
  FullState next = add(x, k1, dt / 6);
  next = add(next, k2, dt / 3);
  next = add(next, k3, dt / 3);
  next = add(next, k4, dt / 6);
  return next;
}

RobotModel RobotModel::from_json_text(const std::string& text) {
  json j = json::parse(text);
  RobotModel m;
  m.name = j.value("name", "robot");
  for (const auto& row : j.at("dh")) {
    DhRow r;
    r.a = row.value("a", 0.0);
    r.alpha = row.value("alpha", 0.0);
    r.d = row.value("d", 0.0);
    r.theta = row.value("theta", 0.0);
    const std::string joint = row.value("joint", "fixed");
    r.joint = joint == "theta"   ? DhRow::Joint::Theta
              : joint == "alpha" ? DhRow::Joint::Alpha
                                 : DhRow::Joint::Fixed;
    m.dh.push_back(r);
  }
  const auto& mount = j.at("mount");
  m.mount = Vec3(mount[0], mount[1], mount[2]);
  for (const auto& link : j.at("links")) {
    LinkMass lm;
    lm.mass = link.at("mass");
    if (lm.mass <= 0.0) throw std::invalid_argument("robot file: link mass must be positive");
    lm.frame = link.at("com_frame");
    const auto& off = link.at("com_offset");
    lm.com_offset = Vec3(off[0], off[1], off[2]);
    m.links.push_back(lm);
  }
  if (j.contains("payload") && !j["payload"].is_null()) {
    Payload p;
    p.mass = j["payload"].at("mass");
    const auto& off = j["payload"].at("offset_f0");
    p.offset_f0 = Vec3(off[0], off[1], off[2]);
    m.payload = p;
  }
  std::vector<Vec2> poly;
  for (const auto& v : j.at("support_polygon")) poly.emplace_back(v[0], v[1]);
  m.support_polygon = ConvexPolygon(poly);
  if (!m.support_polygon.contains(Vec2::Zero()))
    throw std::invalid_argument("robot file: support polygon must contain the base origin");
  m.track_gauge = j.at("track_gauge");

  const auto& jl = j.at("joint_limits");
  const auto& lo = jl.at("lower");
  const auto& hi = jl.at("upper");
  m.joint_limits.lower.resize(lo.size());
  m.joint_limits.upper.resize(hi.size());
  for (size_t i = 0; i < lo.size(); ++i) {
    m.joint_limits.lower(i) = lo[i];
    m.joint_limits.upper(i) = hi[i];
    if (!(m.joint_limits.lower(i) < m.joint_limits.upper(i)))
      throw std::invalid_argument("robot file: joint limit lower must be < upper");
  }
  m.joint_limits.rate = jl.at("rate");
  m.joint_limits.accel = jl.at("accel");

  const auto& bl = j.at("base_limits");
  m.base_limits.v_min = bl.at("v")[0];
  m.base_limits.v_max = bl.at("v")[1];
  m.base_limits.u_a = bl.at("u_a");
  m.base_limits.psi_dot = bl.at("psi_dot");
  m.base_limits.u_psi = bl.at("u_psi");

  const auto& sp = j.at("simplified");
  m.simplified.l2 = sp.at("l2");
  m.simplified.d_min = sp.at("d_min");
  m.simplified.d_max = sp.at("d_max");
  m.simplified.q5 = sp.at("q5");
  return m;
}

RobotModel RobotModel::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open robot file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

}  // namespace tmm
