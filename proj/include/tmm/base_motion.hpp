#pragma once

#include <vector>

#include "tmm/trajopt.hpp"

namespace tmm {

struct SegmentOptions {
  int N = 20;
  double margin_fraction = 0.02;
  SolveOptions solver;
};

/// Minimum-time straight slide from a to b at fixed heading with the arm
/// frozen at q. States (x, y, v, psi_bar, psi_dot), inputs (u_a, u_psi),
/// rest boundary conditions, dynamic ZMP containment at grid points. On
/// solver failure falls back to the quasi-static profile time-scaled through
/// the deviation bounds (status Feasible). Throws Infeasible when even the
/// static slide has no margin.
Trajectory solve_segment_ocp(const RobotModel& model, const TerrainModel& terrain,
                             const Vec2& a, const Vec2& b, double heading,
                             const Eigen::VectorXd& q, const SegmentOptions& opt = {});

/// In-place turn at `position` from psi_from by `sweep` radians (signed).
/// Bang-coast-bang on the heading at the base limits, time-scaled by 0.8
/// per round until the dynamic ZMP stays inside at dense samples.
Trajectory turn_in_place(const RobotModel& model, const TerrainModel& terrain,
                         const Vec2& position, const Eigen::VectorXd& q, double psi_from,
                         double sweep, int samples = 201);

struct BaseSegment {
  Trajectory traj;
  Eigen::VectorXd q;
  bool is_turn = false;
};

double total_time(const std::vector<BaseSegment>& segments);

/// Greedy receding-horizon smoothing: windows of slide-turn-slide (same q)
/// are re-solved as one OCP with an interior waypoint ball at the junction;
/// a window is replaced only when the merged solve is feasible and strictly
/// shorter, so the total duration never increases. Deterministic: the budget
/// is the solver's iteration caps, not wall time.
std::vector<BaseSegment> receding_horizon_smooth(const RobotModel& model,
                                                 const TerrainModel& terrain,
                                                 const std::vector<BaseSegment>& segments,
                                                 int horizon = 20,
                                                 const SegmentOptions& opt = {});

}  // namespace tmm
