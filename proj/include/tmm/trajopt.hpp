#pragma once

#include <utility>

#include "tmm/ocp.hpp"
#include "tmm/robot_model.hpp"
#include "tmm/stability.hpp"
#include "tmm/terrain.hpp"

namespace tmm {

struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverStall : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyInterval : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ManipulationOptions {
  int N = 40;
  // Interior margin demanded at grid points, as a fraction of the support
  // polygon inradius. Large enough that the dense re-simulation check passes.
  double margin_fraction = 0.02;
  SolveOptions solver;
};

/// Minimum-time rest-to-rest trajectory of the reduced arm (q1, d) on a
/// static base with the given attitude. The ZMP constraint is evaluated on
/// the full model through the exact IK map. Throws Infeasible when an
/// endpoint is quasi-statically unstable, SolverStall when the solver or the
/// re-simulation certification fails after one mesh refinement.
Trajectory solve_manipulation_ocp(const RobotModel& model, const SimplifiedState& x0,
                                  const SimplifiedState& xf, const BaseAttitude& attitude,
                                  double gravity, const ManipulationOptions& opt = {});

/// Per-joint synchronized bang-coast-bang at the box limits, no stability
/// constraint. The ZMP record is filled for the given attitude so callers
/// can inspect where the locus leaves the polygon.
Trajectory phase_plane_baseline(const RobotModel& model, const Eigen::VectorXd& q0,
                                const Eigen::VectorXd& qf, const JointLimits& limits,
                                const BaseAttitude& attitude, double gravity,
                                int samples = 201);

/// Safe interval of base linear acceleration given the manipulation plan's
/// ZMP locus: [-d_u, +d_l] scaled by M g_z / M_z, where d_u and d_l are the
/// locus's worst-case distances to the front and rear polygon edges.
/// Throws EmptyInterval when the locus touches both edges.
std::pair<double, double> base_accel_bounds(const std::vector<ZmpPoint>& locus,
                                            const ConvexPolygon& polygon,
                                            const MassAggregates& agg, double g_z);

/// Rest-to-rest minimum-time 1-D profile under an asymmetric acceleration
/// interval and a speed cap. States are (position, speed), input is the
/// acceleration. Throws EmptyInterval when the interval does not allow
/// motion in the required direction.
Trajectory bang_bang_base(double distance, std::pair<double, double> accel_interval,
                          double v_max, int samples = 81);

}  // namespace tmm
