#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "tmm/geometry.hpp"
#include "tmm/terrain.hpp"

namespace tmm {

struct IkDomain : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One Denavit-Hartenberg row. The joint variable may live in the theta or
/// the alpha column (the machine's pitch joints rotate about the link x-axes
/// and therefore sit in the alpha column). The stored a/alpha/d/theta values
/// are constant offsets; the joint angle is added on top.
struct DhRow {
  enum class Joint { Fixed, Theta, Alpha };
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta = 0.0;
  Joint joint = Joint::Fixed;
};

/// Mass point rigidly attached to a chain frame (0 = base frame F0,
/// i = frame after DH row i).
struct LinkMass {
  double mass = 0.0;
  int frame = 0;
  Vec3 com_offset = Vec3::Zero();  // in the attachment frame
};

/// Payload held at the end effector. The offset is expressed in F0 axes and
/// stays fixed in F0 (a tree held upright keeps its axis vertical in the
/// base frame under Assumption 1).
struct Payload {
  double mass = 0.0;
  Vec3 offset_f0 = Vec3::Zero();  // from the end-effector frame origin
};

struct JointLimits {
  Eigen::VectorXd lower, upper;  // rad
  double rate = 0.0;             // rad/s, symmetric
  double accel = 0.0;            // rad/s^2, symmetric
};

struct BaseLimits {
  double v_min = 0.0, v_max = 0.0;      // m/s
  double u_a = 0.0;                     // m/s^2, symmetric
  double psi_dot = 0.0;                 // rad/s, symmetric
  double u_psi = 0.0;                   // rad/s^2, symmetric
};

/// Parameters of the 2-DoF reduced arm (cabin yaw q1, radial reach d) and
/// its exact inverse-kinematics map back to the full joint vector.
struct SimplifiedParams {
  double l2 = 0.0;     // length of links 2 and 3 (equal by construction)
  double d_min = 0.0;  // reach box used by the OCPs
  double d_max = 0.0;
  double q5 = 0.0;     // wrist roll, held constant
};

class RobotModel {
 public:
  static RobotModel from_json_file(const std::string& path);
  static RobotModel from_json_text(const std::string& text);

  std::string name;
  std::vector<DhRow> dh;
  Vec3 mount = Vec3::Zero();  // chain base origin in F0
  std::vector<LinkMass> links;
  std::optional<Payload> payload;
  ConvexPolygon support_polygon;
  double track_gauge = 0.0;
  JointLimits joint_limits;
  BaseLimits base_limits;
  SimplifiedParams simplified;

  int num_joints() const { return static_cast<int>(dh.size()); }
  int num_masses() const {
    return static_cast<int>(links.size()) + (payload ? 1 : 0);
  }
  std::vector<double> masses() const;
  double total_mass() const;
};

/// Rigid-body motion of the base expressed in F0: angular velocity and
/// acceleration of the base frame plus linear acceleration of its origin.
struct BaseMotion {
  Vec3 omega = Vec3::Zero();
  Vec3 alpha = Vec3::Zero();
  Vec3 a_origin = Vec3::Zero();
};

/// Kinematics of every mass point (links, then payload last) in F0,
/// relative to the base, plus the end-effector frame origin.
struct LinkKinematics {
  std::vector<Vec3> p;      // positions
  std::vector<Vec3> v;      // velocities from joint motion
  std::vector<Vec3> a;      // accelerations from joint motion
  Vec3 ee_origin = Vec3::Zero();
  Vec3 ee_v = Vec3::Zero();
  Vec3 ee_a = Vec3::Zero();
};

/// CoM positions of every mass point expressed in F0 (p_i = f_i(q)).
std::vector<Vec3> link_com_positions(const RobotModel& model, const Eigen::VectorXd& q);

LinkKinematics link_kinematics(const RobotModel& model, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& qd, const Eigen::VectorXd& qdd);

/// Inertial CoM accelerations expressed in F0: joint-induced motion composed
/// with the base's rigid motion (rotation about the F0 origin plus linear
/// acceleration of the origin).
std::vector<Vec3> link_com_accelerations(const RobotModel& model, const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& qd, const Eigen::VectorXd& qdd,
                                         const BaseMotion& base = {});

/// Base motion derived from z-x-y Euler angles (yaw, pitch, roll), their
/// rates and accelerations, and the inertial acceleration of the base origin.
BaseMotion base_motion_from_euler(double psi, double theta, double phi, double psi_d,
                                  double theta_d, double phi_d, double psi_dd, double theta_dd,
                                  double phi_dd, const Vec3& pb_ddot_inertial);

/// Rotation matrix of the z-x-y Euler sequence (yaw about z, pitch about x,
/// roll about y).
Mat3 rotation_zxy(double psi, double theta, double phi);

// --- Simplified model ---------------------------------------------------

struct SimplifiedState {
  double q1 = 0.0, q1_dot = 0.0;
  double d = 0.0, d_dot = 0.0;
};

struct SimplifiedInput {
  double u_q1 = 0.0, u_d = 0.0;
};

struct MappedJoints {
  Eigen::VectorXd q, qd, qdd;
};

/// Exact IK map from the reduced coordinates to the full joint vector:
/// q2 = asin(-d / 2*l2), q3 = -pi - 2*q2, q4 = pi/2 + q2, q5 constant,
/// with chain-rule rates and accelerations. Throws IkDomain for |d| >= 2*l2.
MappedJoints simplified_to_full(const RobotModel& model, const SimplifiedState& x,
                                const SimplifiedInput& u);

/// Input/rate box for the reduced model after tightening so that every
/// mapped joint rate and acceleration respects the full-model limits.
struct SimplifiedBounds {
  double q1_rate, q1_accel;
  double d_rate, d_accel;
  int tightening_rounds = 0;
};

/// Scales the (d_rate, d_accel) box down by 0.9 per round (at most
/// max_rounds) until a dense sweep of the box maps inside the joint rate
/// and acceleration limits.
SimplifiedBounds tighten_simplified_bounds(const RobotModel& model, int max_rounds = 10);

// --- Full-state simulation ----------------------------------------------

/// State of the full machine for verification rollouts: planar base pose,
/// forward speed, yaw rate, and the arm joints.
struct FullState {
  double x = 0, y = 0;        // base position (inertial x-y; z follows terrain)
  double heading = 0;         // psi_bar
  double v = 0;               // forward speed along the heading direction
  double heading_rate = 0;
  Eigen::VectorXd q, qd;
};

struct FullInput {
  double u_a = 0, u_psi = 0;
  Eigen::VectorXd u_q;
};

FullState kinematics_rhs(const RobotModel& model, const TerrainModel& terrain,
                         const FullState& x, const FullInput& u);

FullState rk4_step(const RobotModel& model, const TerrainModel& terrain, const FullState& x,
                   const FullInput& u, double dt);

}  // namespace tmm
