#include "tmm/planner.hpp"

#include <algorithm>
#include <cmath>

namespace tmm {

namespace {

using Eigen::VectorXd;

/// Heading whose forward direction (base +y axis projected to the plane)
/// points along dir.
double heading_of(const Vec2& dir) { return std::atan2(-dir.x(), dir.y()); }

double cert_margin(const RobotModel& model, const PlannerParams& params) {
  return params.margin >= 0.0 ? params.margin
                              : 0.02 * model.support_polygon.inradius();
}

double ramp_inflation(const RobotModel& model, const PlannerParams& params) {
  return params.inflation >= 0.0 ? params.inflation
                                 : 0.01 * model.support_polygon.width_x();
}

bool in_obstacle(const PlannerParams& params, const Vec2& p) {
  for (const auto& obs : params.obstacles)
    if (obs.contains(p)) return true;
  return false;
}

struct NodeCheck {
  bool ok = false;
  ZmpPoint zmp;
  double margin = 0.0;
  double traction = 0.0;
};

/// Quasi-static stability, traction and the x_zmp deviation limit at a pose.
NodeCheck check_pose(const RobotModel& model, const TerrainModel& terrain,
                     const MassAggregates& agg, const BaseAttitude& att,
                     const PlannerParams& params, double margin_req) {
  NodeCheck out;
  const Vec3 grav = gravity_in_base(att, terrain.gravity_magnitude());
  out.zmp = zmp_quasistatic(agg, grav);
  const ContainsResult cr = contains(model.support_polygon, out.zmp, margin_req);
  out.margin = cr.margins.margin;
  if (!cr.ok) return out;
  try {
    const TractionState ts =
        traction_state(agg, grav, out.zmp, model.track_gauge, params.mu);
    out.traction = traction_score(ts);
  } catch (const SlidingStatically&) {
    return out;
  }
  if (params.traction_opt &&
      std::abs(out.zmp.x) >
          deviation_limit(att.slope_angle(), model.support_polygon.width_x()))
    return out;
  out.ok = true;
  return out;
}

}  // namespace

EdgeCertificate zmp_stable_edge(const PlanNode& a, const PlanNode& b, const RobotModel& model,
                                const TerrainModel& terrain, const PlannerParams& params) {
  EdgeCertificate cert;
  const double margin_req = cert_margin(model, params);
  const double infl = ramp_inflation(model, params);
  const double g = terrain.gravity_magnitude();
  const std::vector<Vec3> pts = link_com_positions(model, b.q);
  const MassAggregates agg = MassAggregates::from_points(model.masses(), pts);

  const Vec2 delta = b.position - a.position;
  const double dist = delta.norm();
  if (dist > params.max_step + 1e-9) {
    cert.reason = "edge longer than the step limit";
    return cert;
  }
  const double psi_edge = dist > 1e-12 ? heading_of(delta / dist) : b.heading;

  // (i) in-place turn at a onto the edge heading; shorter sweep first.
  const double sweep = wrap_angle(psi_edge - a.heading);
  bool turn_ok = false;
  for (const double s :
       {sweep, sweep - (sweep >= 0.0 ? 2.0 * M_PI : -2.0 * M_PI)}) {
    const ZmpEnvelope env = turn_envelope(agg, a.attitude.R, s);
    const ContainsResult cr = contains(model.support_polygon, env, margin_req);
    if (cr.ok) {
      cert.turn = env;
      cert.turn_margin = cr.margins.margin;
      turn_ok = true;
      break;
    }
    if (!turn_ok) cert.turn_margin = cr.margins.margin;
  }
  if (!turn_ok) {
    cert.reason = "turn arc leaves the polygon";
    return cert;
  }

  // (ii) relocation rectangles along the slide, one per attitude sub-step.
  cert.ramp_margin = std::numeric_limits<double>::infinity();
  const int steps = std::max(1, static_cast<int>(std::ceil(dist / params.ramp_substep)));
  try {
    BaseAttitude prev = terrain.base_attitude(a.position.x(), a.position.y(), psi_edge);
    for (int k = 1; k <= steps; ++k) {
      const Vec2 p = a.position + delta * (static_cast<double>(k) / steps);
      if (in_obstacle(params, p)) {
        cert.reason = "edge crosses an obstacle";
        return cert;
      }
      const BaseAttitude cur = terrain.base_attitude(p.x(), p.y(), psi_edge);
      const ZmpEnvelope env = relocation_envelope(agg, prev.R, cur.R, g, infl);
      const ContainsResult cr = contains(model.support_polygon, env, margin_req);
      cert.ramp_margin = std::min(cert.ramp_margin, cr.margins.margin);
      if (!cr.ok) {
        cert.reason = "relocation rectangle leaves the polygon";
        return cert;
      }
      cert.ramps.push_back(env);
      prev = cur;
    }
  } catch (const OutOfBounds&) {
    cert.reason = "edge leaves the terrain bounds";
    return cert;
  } catch (const StepTooLarge&) {
    cert.reason = "attitude sub-step exceeds the ramp cap";
    return cert;
  }

  // (iii) endpoint traction with the edge heading.
  try {
    const BaseAttitude att_a =
        terrain.base_attitude(a.position.x(), a.position.y(), psi_edge);
    for (int end = 0; end < 2; ++end) {
      const BaseAttitude& att = end == 0 ? att_a : b.attitude;
      const Vec3 grav = gravity_in_base(att, g);
      const ZmpPoint zmp = zmp_quasistatic(agg, grav);
      const TractionState ts =
          traction_state(agg, grav, zmp, model.track_gauge, params.mu);
      (end == 0 ? cert.traction_a : cert.traction_b) = traction_score(ts);
      if (params.traction_opt &&
          std::abs(zmp.x) >
              deviation_limit(att.slope_angle(), model.support_polygon.width_x())) {
        cert.reason = "x_zmp beyond the traction deviation limit";
        return cert;
      }
    }
  } catch (const SlidingStatically&) {
    cert.reason = "static friction exceeded at an endpoint";
    return cert;
  } catch (const OutOfBounds&) {
    cert.reason = "endpoint outside the terrain bounds";
    return cert;
  }

  cert.ok = true;
  return cert;
}

Eigen::VectorXd reconfigure(const PlanNode& node, const RobotModel& model,
                            const TerrainModel& terrain, const PlannerParams& params,
                            std::mt19937_64& rng) {
  const double margin_req = cert_margin(model, params);
  auto margin_of = [&](const VectorXd& q) {
    const std::vector<Vec3> pts = link_com_positions(model, q);
    const MassAggregates agg = MassAggregates::from_points(model.masses(), pts);
    const NodeCheck c =
        check_pose(model, terrain, agg, node.attitude, params, margin_req);
    return c.ok ? c.margin : -std::numeric_limits<double>::infinity();
  };

  VectorXd best_q = node.q;
  double best = margin_of(node.q);
  std::uniform_real_distribution<double> uq1(-M_PI, M_PI);
  std::uniform_real_distribution<double> ud(model.simplified.d_min, model.simplified.d_max);
  for (int s = 0; s < params.reconfigure_samples; ++s) {
    const double q1 = uq1(rng);
    const double d = ud(rng);
    VectorXd q;
    try {
      q = simplified_to_full(model, {q1, 0.0, d, 0.0}, {}).q;
    } catch (const IkDomain&) {
      continue;
    }
    const double m = margin_of(q);
    if (m > best) {
      best = m;
      best_q = q;
    }
  }
  if (!std::isfinite(best) || best == -std::numeric_limits<double>::infinity())
    throw NoStableConfigFound("no stable configuration within the sample budget");
  return best_q;
}

PlanResult terrain_rrt(const RobotModel& model, const TerrainModel& terrain,
                       const Vec2& p_init, const Vec2& p_goal, const Eigen::VectorXd& q_init,
                       const PlannerParams& params) {
  PlanResult res;
  res.graph.rng_seed = params.seed;
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> ux(params.sample_min.x(), params.sample_max.x());
  std::uniform_real_distribution<double> uy(params.sample_min.y(), params.sample_max.y());

  const double margin_req = cert_margin(model, params);
  VectorXd q_robot = q_init;
  std::vector<Vec3> pts = link_com_positions(model, q_robot);
  MassAggregates agg = MassAggregates::from_points(model.masses(), pts);

  auto make_node = [&](const Vec2& p, double heading, const VectorXd& q,
                       const MassAggregates& a) -> std::pair<bool, PlanNode> {
    PlanNode n;
    n.position = p;
    n.heading = heading;
    n.q = q;
    try {
      n.attitude = terrain.base_attitude(p.x(), p.y(), heading);
    } catch (const OutOfBounds&) {
      return {false, n};
    }
    const NodeCheck c = check_pose(model, terrain, a, n.attitude, params, margin_req);
    n.zmp = c.zmp;
    n.margin = c.margin;
    return {c.ok && !in_obstacle(params, p), n};
  };

  const Vec2 to_goal = p_goal - p_init;
  const double init_heading =
      to_goal.norm() > 1e-12 ? heading_of(to_goal.normalized()) : 0.0;
  auto [root_ok, root] = make_node(p_init, init_heading, q_robot, agg);
  if (!root_ok) throw InitUnstable("initial pose fails the stability checks");
  res.graph.nodes.push_back(root);
  res.graph.certificates.emplace_back();
  res.graph.certificates.back().ok = true;

  int goal_node = (p_goal - p_init).norm() <= params.goal_radius ? 0 : -1;
  double best_goal_dist = (p_goal - p_init).norm();
  int best_node = 0;
  int since_progress = 0;
  int it = 0;
  for (; it < params.max_iterations && goal_node < 0; ++it) {
    const Vec2 target = u01(rng) < params.goal_bias ? p_goal : Vec2(ux(rng), uy(rng));

    int nearest = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(res.graph.nodes.size()); ++i) {
      const double d = (res.graph.nodes[i].position - target).norm();
      if (d < best_d) {
        best_d = d;
        nearest = i;
      }
    }
    const PlanNode& a = res.graph.nodes[nearest];
    const Vec2 delta = target - a.position;
    if (delta.norm() < 1e-9) goto stalled;
    {
      const Vec2 step = delta * std::min(1.0, params.max_step / delta.norm());
      const Vec2 p_new = a.position + step;
      const double psi = heading_of(step.normalized());

      auto [ok, b] = make_node(p_new, psi, q_robot, agg);
      if (!ok) goto stalled;
      // A configuration change at the parent must itself be stable there.
      if (a.q.size() != q_robot.size() ||
          (a.q - q_robot).lpNorm<Eigen::Infinity>() != 0.0) {
        const NodeCheck pc = check_pose(model, terrain, agg, a.attitude, params, margin_req);
        if (!pc.ok) goto stalled;
      }
      EdgeCertificate cert = zmp_stable_edge(a, b, model, terrain, params);
      if (!cert.ok) goto stalled;

      b.parent = nearest;
      res.graph.nodes.push_back(b);
      res.graph.certificates.push_back(std::move(cert));
      const double dist = (p_new - p_goal).norm();
      if (dist < best_goal_dist - 1e-9) {
        best_goal_dist = dist;
        best_node = static_cast<int>(res.graph.nodes.size()) - 1;
        since_progress = 0;
      }
      if (dist <= params.goal_radius)
        goal_node = static_cast<int>(res.graph.nodes.size()) - 1;
    }

  stalled:
    // Growth stalls when the tree stops getting closer to the goal; the
    // tree may still densify inside a region walled off by unstable
    // terrain. Reconfigure at the frontier node nearest the goal.
    if (++since_progress >= params.growth_window) {
      since_progress = 0;
      const PlanNode& stall = res.graph.nodes[best_node];
      try {
        VectorXd q_new = reconfigure(stall, model, terrain, params, rng);
        if ((q_new - q_robot).lpNorm<Eigen::Infinity>() != 0.0) {
          ReconfigEvent ev;
          ev.node = best_node;
          ev.q_before = q_robot;
          ev.q_after = q_new;
          res.graph.reconfigurations.push_back(ev);
          q_robot = q_new;
          pts = link_com_positions(model, q_robot);
          agg = MassAggregates::from_points(model.masses(), pts);
        }
      } catch (const NoStableConfigFound&) {
        // keep the current configuration and continue sampling
      }
    }
  }
  res.graph.iterations = it;

  if (goal_node < 0) return res;  // budget exhausted; partial graph returned

  std::vector<int> chain;
  for (int i = goal_node; i >= 0; i = res.graph.nodes[i].parent) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());
  for (int idx : chain) res.path.waypoints.push_back(res.graph.nodes[idx]);
  for (size_t i = 0; i + 1 < res.path.waypoints.size(); ++i) {
    res.path.length +=
        (res.path.waypoints[i + 1].position - res.path.waypoints[i].position).norm();
    const VectorXd& qa = res.path.waypoints[i].q;
    const VectorXd& qb = res.path.waypoints[i + 1].q;
    if ((qa - qb).lpNorm<Eigen::Infinity>() != 0.0) {
      ReconfigEvent ev;
      ev.node = static_cast<int>(i);
      ev.q_before = qa;
      ev.q_after = qb;
      res.path.events.push_back(ev);
    }
  }
  res.path.found = true;
  return res;
}

}  // namespace tmm
