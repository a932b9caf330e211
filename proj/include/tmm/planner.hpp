#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tmm/robot_model.hpp"
#include "tmm/stability.hpp"
#include "tmm/terrain.hpp"
#include "tmm/traction.hpp"

namespace tmm {

struct InitUnstable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IterationBudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoStableConfigFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PlannerParams {
  double max_step = 2.0;
  double goal_bias = 0.05;
  double goal_radius = 2.0;
  int max_iterations = 50000;
  int growth_window = 200;  // iterations without goal progress before reconfiguring
  int reconfigure_samples = 64;
  double mu = 0.9;             // track-terrain friction coefficient
  double margin = -1.0;        // certificate margin; <0 means 2% of inradius
  double inflation = -1.0;     // relocation inflation; <0 means 1% of width
  double ramp_substep = 0.5;   // m, attitude sub-sampling along an edge
  bool traction_opt = true;    // enforce deviation_limit on x_zmp
  std::uint64_t seed = 0;
  Vec2 sample_min = Vec2(-50.0, -50.0);
  Vec2 sample_max = Vec2(50.0, 50.0);
  std::vector<ConvexPolygon> obstacles;
};

struct PlanNode {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
  Eigen::VectorXd q;
  int parent = -1;
  BaseAttitude attitude;
  ZmpPoint zmp;
  double margin = 0.0;
};

/// Record of the checks that let an edge into the tree: the in-place turn
/// arc at the parent and the chain of relocation rectangles along the slide,
/// each strictly inside the polygon, plus endpoint traction.
struct EdgeCertificate {
  bool ok = false;
  ZmpEnvelope turn;
  std::vector<ZmpEnvelope> ramps;
  double turn_margin = 0.0;
  double ramp_margin = 0.0;
  double traction_a = 0.0, traction_b = 0.0;
  std::string reason;  // empty when ok
};

struct ReconfigEvent {
  int node = -1;  // node index where growth stalled
  Eigen::VectorXd q_before, q_after;
};

struct PlanGraph {
  std::vector<PlanNode> nodes;
  std::vector<EdgeCertificate> certificates;  // certificates[i] covers edge into node i
  std::vector<ReconfigEvent> reconfigurations;
  std::uint64_t rng_seed = 0;
  int iterations = 0;
};

struct QuasiStaticPath {
  std::vector<PlanNode> waypoints;
  std::vector<ReconfigEvent> events;  // indices into waypoints
  double length = 0.0;
  bool found = false;
};

struct PlanResult {
  PlanGraph graph;
  QuasiStaticPath path;
};

/// Certifies the slide from a to b with configuration q: turn arc at a to
/// the edge heading, chained relocation rectangles along the edge, endpoint
/// traction and the x_zmp deviation limit. Never throws; failures set
/// ok = false with a reason.
EdgeCertificate zmp_stable_edge(const PlanNode& a, const PlanNode& b, const RobotModel& model,
                                const TerrainModel& terrain, const PlannerParams& params);

/// Best-margin stable configuration out of `samples` uniform (q1, d) draws
/// at the node; returns the current q when it beats every sample. Throws
/// NoStableConfigFound when nothing is stable.
Eigen::VectorXd reconfigure(const PlanNode& node, const RobotModel& model,
                            const TerrainModel& terrain, const PlannerParams& params,
                            std::mt19937_64& rng);

/// Algorithm: ZMP-constrained RRT with stall-triggered reconfiguration.
PlanResult terrain_rrt(const RobotModel& model, const TerrainModel& terrain,
                       const Vec2& p_init, const Vec2& p_goal, const Eigen::VectorXd& q_init,
                       const PlannerParams& params);

}  // namespace tmm
