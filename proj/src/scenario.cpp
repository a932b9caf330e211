#include "tmm/scenario.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include "tmm/base_motion.hpp"
#include "tmm/planner.hpp"
#include "tmm/trajopt.hpp"

namespace tmm {

namespace {

using Eigen::VectorXd;
using nlohmann::json;
namespace fs = std::filesystem;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

const json& require_field(const json& j, const std::string& key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing field '" + key + "' in " + where);
  return *it;
}

double num_or(const json& j, const std::string& key, double fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : it->get<double>();
}

TerrainModel terrain_from_json(const json& jt) {
  const std::string type = require_field(jt, "type", "terrain").get<std::string>();
  const double g = num_or(jt, "gravity", 9.81);
  TerrainModel t = TerrainModel::flat(g);
  if (type == "flat") {
  } else if (type == "inclined_plane") {
    t = TerrainModel::inclined_plane(num_or(jt, "slope_x", 0.0), num_or(jt, "slope_y", 0.0),
                                     g);
  } else if (type == "sinusoidal_mountain") {
    t = TerrainModel::sinusoidal_mountain(
        require_field(jt, "amplitude", "terrain").get<double>(),
        require_field(jt, "period_scale", "terrain").get<double>(), g);
  } else {
    throw ConfigError("unknown terrain type '" + type + "'");
  }
  if (jt.contains("bounds")) {
    const auto& b = jt["bounds"];
    if (!b.is_array() || b.size() != 4)
      throw ConfigError("terrain.bounds must be [x_min, x_max, y_min, y_max]");
    t.set_bounds(b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                 b[3].get<double>());
  }
  return t;
}

BaseAttitude attitude_from_json(const json& ja) {
  const double pitch = num_or(ja, "pitch_deg", 0.0) * M_PI / 180.0;
  const double roll = num_or(ja, "roll_deg", 0.0) * M_PI / 180.0;
  return attitude_from_pitch_roll(pitch, roll);
}

/// Fixed-format CSV writer so reruns are byte-identical.
class Csv {
 public:
  Csv(const fs::path& path, const std::string& header) : out_(path) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    out_ << header << "\n";
  }
  void row(const std::vector<double>& vals) {
    char buf[32];
    for (size_t i = 0; i < vals.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.10g", vals[i]);
      out_ << (i ? "," : "") << buf;
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

double min_margin(const Trajectory& tr) {
  double worst = std::numeric_limits<double>::infinity();
  for (double m : tr.margin) worst = std::min(worst, m);
  return worst;
}

void write_trajectory_csv(const fs::path& path, const Trajectory& tr,
                          const std::vector<std::string>& state_names,
                          const std::vector<std::string>& input_names) {
  std::string header = "t";
  for (const auto& s : state_names) header += "," + s;
  for (const auto& s : input_names) header += "," + s;
  header += ",x_zmp,y_zmp,margin";
  Csv csv(path, header);
  for (size_t k = 0; k < tr.t.size(); ++k) {
    std::vector<double> row{tr.t[k]};
    for (int i = 0; i < tr.x[k].size(); ++i) row.push_back(tr.x[k](i));
    for (int i = 0; i < tr.u[k].size(); ++i) row.push_back(tr.u[k](i));
    row.push_back(k < tr.zmp_x.size() ? tr.zmp_x[k] : 0.0);
    row.push_back(k < tr.zmp_y.size() ? tr.zmp_y[k] : 0.0);
    row.push_back(k < tr.margin.size() ? tr.margin[k] : 0.0);
    csv.row(row);
  }
}

const char* status_name(TrajStatus s) {
  switch (s) {
    case TrajStatus::Optimal: return "optimal";
    case TrajStatus::Feasible: return "feasible";
    default: return "failed";
  }
}

struct Context {
  json scn;
  fs::path scn_dir;
  fs::path out;
  RunOptions opts;
  RobotModel model;
  std::uint64_t seed = 0;
};

SimplifiedState endpoint_from_json(const json& j, const std::string& where) {
  SimplifiedState x;
  x.q1 = require_field(j, "q1", where).get<double>();
  x.d = require_field(j, "d", where).get<double>();
  return x;
}

double reach_of(const RobotModel& model, const VectorXd& q) {
  return -2.0 * model.simplified.l2 * std::sin(q(1));
}

// --- manipulate -----------------------------------------------------------

int run_manipulate(Context& ctx) {
  const json& jm = require_field(ctx.scn, "manipulation", "scenario");
  const BaseAttitude att = attitude_from_json(require_field(ctx.scn, "attitude", "scenario"));
  const double g = num_or(ctx.scn, "gravity", 9.81);
  ManipulationOptions opt;
  opt.N = static_cast<int>(num_or(jm, "N", opt.N));
  opt.margin_fraction = num_or(jm, "margin_fraction", opt.margin_fraction);
  const SimplifiedState x0 = endpoint_from_json(require_field(jm, "x0", "manipulation"),
                                                "manipulation.x0");
  const SimplifiedState xf = endpoint_from_json(require_field(jm, "xf", "manipulation"),
                                                "manipulation.xf");

  json summary;
  summary["mode"] = "manipulate";
  const auto t0 = std::chrono::steady_clock::now();
  Trajectory tr;
  try {
    tr = solve_manipulation_ocp(ctx.model, x0, xf, att, g, opt);
  } catch (const Infeasible& e) {
    summary["status"] = "infeasible";
    summary["error"] = e.what();
    write_json_file(ctx.out / "summary.json", summary);
    return 2;
  } catch (const SolverStall& e) {
    summary["status"] = "stalled";
    summary["error"] = e.what();
    write_json_file(ctx.out / "summary.json", summary);
    return 3;
  }
  summary["wall_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  summary["status"] = status_name(tr.status);
  summary["t_f"] = tr.t_f;
  summary["min_margin"] = min_margin(tr);
  summary["inner_iterations"] = tr.inner_iters;

  write_trajectory_csv(ctx.out / "trajectory.csv", tr, {"q1", "q1_dot", "d", "d_dot"},
                       {"u_q1", "u_d"});
  Csv zmp(ctx.out / "zmp.csv", "t,x_zmp,y_zmp,margin");
  for (size_t k = 0; k < tr.t.size(); ++k)
    zmp.row({tr.t[k], tr.zmp_x[k], tr.zmp_y[k], tr.margin[k]});

  if (ctx.scn.contains("base")) {
    const json& jb = ctx.scn["base"];
    const double distance = require_field(jb, "distance", "base").get<double>();
    const double safety = num_or(jb, "safety", 0.9);
    // worst-case (largest) M_z over the manipulation plan, conservative
    double mz_worst = 0.0, m_total = 0.0;
    for (size_t k = 0; k < tr.t.size(); ++k) {
      const SimplifiedState xs{tr.x[k](0), 0.0, tr.x[k](2), 0.0};
      const MappedJoints mj = simplified_to_full(ctx.model, xs, {});
      const auto pts = link_com_positions(ctx.model, mj.q);
      const auto agg = MassAggregates::from_points(ctx.model.masses(), pts);
      mz_worst = std::max(mz_worst, agg.Mz);
      m_total = agg.M;
    }
    MassAggregates agg;
    agg.M = m_total;
    agg.Mz = mz_worst;
    std::vector<ZmpPoint> locus;
    for (size_t k = 0; k < tr.t.size(); ++k) locus.push_back({tr.zmp_x[k], tr.zmp_y[k]});
    const double g_z = gravity_in_base(att, g).z();
    try {
      auto bounds = base_accel_bounds(locus, ctx.model.support_polygon, agg, g_z);
      bounds.first = std::max(bounds.first * safety, -ctx.model.base_limits.u_a);
      bounds.second = std::min(bounds.second * safety, ctx.model.base_limits.u_a);
      const Trajectory base =
          bang_bang_base(distance, bounds, ctx.model.base_limits.v_max);
      Csv bcsv(ctx.out / "base.csv", "t,s,v,a");
      for (size_t k = 0; k < base.t.size(); ++k)
        bcsv.row({base.t[k], base.x[k](0), base.x[k](1), base.u[k](0)});
      summary["base"] = {{"accel_lower", bounds.first},
                        {"accel_upper", bounds.second},
                        {"t_f", base.t_f}};
    } catch (const EmptyInterval& e) {
      summary["base"] = {{"error", e.what()}};
      write_json_file(ctx.out / "summary.json", summary);
      return 2;
    }
  }
  write_json_file(ctx.out / "summary.json", summary);
  return 0;
}

// --- baseline_compare -----------------------------------------------------

int run_baseline_compare(Context& ctx) {
  const json& jm = require_field(ctx.scn, "manipulation", "scenario");
  const BaseAttitude att = attitude_from_json(require_field(ctx.scn, "attitude", "scenario"));
  const double g = num_or(ctx.scn, "gravity", 9.81);
  const SimplifiedState x0 = endpoint_from_json(require_field(jm, "x0", "manipulation"),
                                                "manipulation.x0");
  const SimplifiedState xf = endpoint_from_json(require_field(jm, "xf", "manipulation"),
                                                "manipulation.xf");

  const MappedJoints m0 = simplified_to_full(ctx.model, {x0.q1, 0.0, x0.d, 0.0}, {});
  const MappedJoints m1 = simplified_to_full(ctx.model, {xf.q1, 0.0, xf.d, 0.0}, {});
  const Trajectory base =
      phase_plane_baseline(ctx.model, m0.q, m1.q, ctx.model.joint_limits, att, g);
  write_trajectory_csv(ctx.out / "baseline.csv", base,
                       {"q1", "q2", "q3", "q4", "q5", "qd1", "qd2", "qd3", "qd4", "qd5"},
                       {"u1", "u2", "u3", "u4", "u5"});

  json summary;
  summary["mode"] = "baseline_compare";
  summary["baseline"] = {{"t_f", base.t_f}, {"min_margin", min_margin(base)}};
  try {
    const Trajectory tr = solve_manipulation_ocp(ctx.model, x0, xf, att, g);
    write_trajectory_csv(ctx.out / "optimized.csv", tr, {"q1", "q1_dot", "d", "d_dot"},
                         {"u_q1", "u_d"});
    summary["optimized"] = {{"t_f", tr.t_f},
                            {"min_margin", min_margin(tr)},
                            {"status", status_name(tr.status)}};
  } catch (const std::runtime_error& e) {
    summary["optimized"] = {{"error", e.what()}};
    write_json_file(ctx.out / "summary.json", summary);
    return 2;
  }
  write_json_file(ctx.out / "summary.json", summary);
  return 0;
}

// Dynamic ZMP margin of a frozen-arm base state (x, y, v, psi, psi_dot)
// under inputs (u_a, u_psi), written from the public kinematics API so it
// re-derives the solver's constraint independently.
double base_state_margin(const RobotModel& model, const TerrainModel& terrain,
                         const VectorXd& q, const VectorXd& x, const VectorXd& u) {
  BaseAttitude att;
  try {
    att = terrain.base_attitude(x(0), x(1), x(3));
  } catch (const OutOfBounds&) {
    return -model.support_polygon.inradius();
  }
  BaseMotion bm;
  bm.omega = Vec3(0.0, 0.0, x(4));
  bm.alpha = Vec3(0.0, 0.0, u(1));
  bm.a_origin = Vec3(-x(2) * x(4), u(0), 0.0);
  const VectorXd zero = VectorXd::Zero(q.size());
  const LinkKinematics kin = link_kinematics(model, q, zero, zero);
  const auto acc = link_com_accelerations(model, q, zero, zero, bm);
  const Vec3 grav = gravity_in_base(att, terrain.gravity_magnitude());
  const ZmpPoint zmp = zmp_dynamic(model.masses(), kin.p, acc, grav);
  return contains(model.support_polygon, zmp).margins.margin;
}

double arm_state_margin(const RobotModel& model, const BaseAttitude& att, double g,
                        const Eigen::Vector4d& x, const Eigen::Vector2d& u) {
  MappedJoints mj;
  try {
    mj = simplified_to_full(model, {x(0), x(1), x(2), x(3)}, {u(0), u(1)});
  } catch (const IkDomain&) {
    return -model.support_polygon.inradius();
  }
  const LinkKinematics kin = link_kinematics(model, mj.q, mj.qd, mj.qdd);
  const Vec3 grav = gravity_in_base(att, g);
  const ZmpPoint zmp = zmp_dynamic(model.masses(), kin.p, kin.a, grav);
  return contains(model.support_polygon, zmp).margins.margin;
}

// RK4 re-simulation of one segment at `refine`x mesh density with linear
// input interpolation; appends (t_base + t, margin) rows.
template <typename MarginFn, typename RhsFn>
void resim_segment(const Trajectory& tr, int state_dim, double t_base, int refine,
                   const MarginFn& margin_at, const RhsFn& rhs, Csv& out,
                   double& worst) {
  const int n = static_cast<int>(tr.t.size());
  if (n < 2) return;
  auto u_at = [&](double t) -> Eigen::Vector2d {
    if (t <= tr.t.front()) return tr.u.front().head<2>();
    if (t >= tr.t.back()) return tr.u.back().head<2>();
    const auto it = std::upper_bound(tr.t.begin(), tr.t.end(), t);
    const size_t k = it - tr.t.begin() - 1;
    const double s = (t - tr.t[k]) / (tr.t[k + 1] - tr.t[k]);
    return ((1.0 - s) * tr.u[k] + s * tr.u[k + 1]).head<2>();
  };
  VectorXd x = tr.x.front().head(state_dim);
  for (int k = 0; k + 1 < n; ++k) {
    const double h = (tr.t[k + 1] - tr.t[k]) / refine;
    if (h <= 0.0) continue;
    for (int i = 0; i < refine; ++i) {
      const double t = tr.t[k] + i * h;
      const VectorXd k1 = rhs(x, u_at(t));
      const VectorXd k2 = rhs(x + 0.5 * h * k1, u_at(t + 0.5 * h));
      const VectorXd k3 = rhs(x + 0.5 * h * k2, u_at(t + 0.5 * h));
      const VectorXd k4 = rhs(x + h * k3, u_at(t + h));
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double m = margin_at(x, u_at(t + h));
      out.row({t_base + t + h, m});
      worst = std::min(worst, m);
    }
  }
}

// --- relocate -------------------------------------------------------------

json arc_to_json(const ZmpEnvelope& env) {
  return {{"center", {env.arc.center.x(), env.arc.center.y()}},
          {"radius", env.arc.radius},
          {"start_angle", env.arc.start_angle},
          {"sweep", env.arc.sweep}};
}

int run_relocate(Context& ctx) {
  const json& jr = require_field(ctx.scn, "relocate", "scenario");
  const TerrainModel terrain =
      terrain_from_json(require_field(ctx.scn, "terrain", "scenario"));
  const double g = terrain.gravity_magnitude();

  PlannerParams params;
  params.seed = ctx.seed;
  if (jr.contains("planner")) {
    const json& jp = jr["planner"];
    params.max_step = num_or(jp, "max_step", params.max_step);
    params.goal_bias = num_or(jp, "goal_bias", params.goal_bias);
    params.goal_radius = num_or(jp, "goal_radius", params.goal_radius);
    params.max_iterations =
        static_cast<int>(num_or(jp, "max_iterations", params.max_iterations));
    params.growth_window = static_cast<int>(num_or(jp, "growth_window", params.growth_window));
    params.reconfigure_samples =
        static_cast<int>(num_or(jp, "reconfigure_samples", params.reconfigure_samples));
    params.mu = num_or(jp, "mu", params.mu);
    params.ramp_substep = num_or(jp, "ramp_substep", params.ramp_substep);
    if (jp.contains("sample_min"))
      params.sample_min = Vec2(jp["sample_min"][0].get<double>(),
                               jp["sample_min"][1].get<double>());
    if (jp.contains("sample_max"))
      params.sample_max = Vec2(jp["sample_max"][0].get<double>(),
                               jp["sample_max"][1].get<double>());
  }
  if (ctx.opts.no_traction_opt) params.traction_opt = false;

  const auto& js = require_field(jr, "start", "relocate");
  const auto& jg = require_field(jr, "goal", "relocate");
  const Vec2 start(js[0].get<double>(), js[1].get<double>());
  const Vec2 goal(jg[0].get<double>(), jg[1].get<double>());
  const double q1_init = num_or(jr, "q1", 0.0);
  const double d_init = num_or(jr, "d", 1.0);
  const VectorXd q_init =
      simplified_to_full(ctx.model, {q1_init, 0.0, d_init, 0.0}, {}).q;

  json summary;
  summary["mode"] = "relocate";
  const auto t0 = std::chrono::steady_clock::now();
  PlanResult pr;
  try {
    pr = terrain_rrt(ctx.model, terrain, start, goal, q_init, params);
  } catch (const InitUnstable& e) {
    summary["status"] = "infeasible";
    summary["error"] = e.what();
    write_json_file(ctx.out / "summary.json", summary);
    return 2;
  }
  summary["plan_wall_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  summary["iterations"] = pr.graph.iterations;
  summary["tree_nodes"] = pr.graph.nodes.size();
  summary["found"] = pr.path.found;
  if (!pr.path.found) {
    summary["status"] = "budget_exhausted";
    write_json_file(ctx.out / "summary.json", summary);
    return 3;
  }

  const auto& wps = pr.path.waypoints;
  {
    Csv path(ctx.out / "path.csv", "node,x,y,z,heading,q1,q2,q3,q4,q5,margin");
    for (size_t i = 0; i < wps.size(); ++i) {
      std::vector<double> row{static_cast<double>(i), wps[i].position.x(),
                              wps[i].position.y(),
                              terrain.height(wps[i].position.x(), wps[i].position.y()),
                              wps[i].heading};
      for (int k = 0; k < wps[i].q.size(); ++k) row.push_back(wps[i].q(k));
      row.push_back(wps[i].margin);
      path.row(row);
    }
  }
  double mean_abs_x = 0.0;
  for (const auto& w : wps) mean_abs_x += std::abs(w.zmp.x);
  mean_abs_x /= static_cast<double>(wps.size());
  summary["path_length"] = pr.path.length;
  summary["waypoints"] = wps.size();
  summary["reconfigurations"] = pr.path.events.size();
  summary["mean_abs_x_zmp_path"] = mean_abs_x;

  // per-edge certificates, recomputed along the final path
  json certs = json::array();
  std::vector<EdgeCertificate> edge_certs;
  for (size_t i = 1; i < wps.size(); ++i) {
    EdgeCertificate c = zmp_stable_edge(wps[i - 1], wps[i], ctx.model, terrain, params);
    json jc;
    jc["edge"] = i - 1;
    jc["ok"] = c.ok;
    jc["turn"] = arc_to_json(c.turn);
    jc["turn_margin"] = c.turn_margin;
    jc["ramp_margin"] = c.ramp_margin;
    json rects = json::array();
    for (const auto& env : c.ramps)
      rects.push_back({{"lo", {env.rect.lo.x(), env.rect.lo.y()}},
                       {"hi", {env.rect.hi.x(), env.rect.hi.y()}}});
    jc["rectangles"] = rects;
    jc["traction"] = {c.traction_a, c.traction_b};
    certs.push_back(jc);
    edge_certs.push_back(std::move(c));
  }
  write_json_file(ctx.out / "certificates.json", certs);

  // trajectory generation: reconfigure, turn, slide per edge
  struct Item {
    std::string kind;
    Trajectory traj;
    VectorXd q;
    BaseAttitude att;  // used by reconfigure items (static base)
  };
  std::vector<Item> items;
  SegmentOptions seg_opt;
  seg_opt.N = static_cast<int>(num_or(jr, "segment_N", seg_opt.N));
  ManipulationOptions man_opt;
  int fallbacks = 0;
  try {
    for (size_t i = 1; i < wps.size(); ++i) {
      const PlanNode& a = wps[i - 1];
      const PlanNode& b = wps[i];
      if ((a.q - b.q).lpNorm<Eigen::Infinity>() != 0.0) {
        const SimplifiedState xa{a.q(0), 0.0, reach_of(ctx.model, a.q), 0.0};
        const SimplifiedState xb{b.q(0), 0.0, reach_of(ctx.model, b.q), 0.0};
        Item it{"reconfigure",
                solve_manipulation_ocp(ctx.model, xa, xb, a.attitude, g, man_opt), b.q,
                a.attitude};
        items.push_back(std::move(it));
      }
      const double sweep = -edge_certs[i - 1].turn.arc.sweep;
      if (std::abs(sweep) > 1e-12)
        items.push_back({"turn",
                         turn_in_place(ctx.model, terrain, a.position, b.q, a.heading, sweep),
                         b.q});
      Trajectory slide =
          solve_segment_ocp(ctx.model, terrain, a.position, b.position, b.heading, b.q,
                            seg_opt);
      if (slide.status == TrajStatus::Feasible) ++fallbacks;
      items.push_back({"slide", std::move(slide), b.q});
    }
  } catch (const Infeasible& e) {
    summary["status"] = "infeasible";
    summary["error"] = e.what();
    write_json_file(ctx.out / "summary.json", summary);
    return 2;
  } catch (const SolverStall& e) {
    summary["status"] = "stalled";
    summary["error"] = e.what();
    write_json_file(ctx.out / "summary.json", summary);
    return 3;
  }

  double t_before = 0.0;
  for (const auto& it : items) t_before += it.traj.t_f;
  summary["segment_fallbacks"] = fallbacks;
  summary["t_total_segments"] = t_before;

  const bool smooth =
      !ctx.opts.no_smooth && num_or(jr, "smooth", 1.0) != 0.0;
  if (smooth) {
    const int horizon = static_cast<int>(num_or(jr, "horizon", 20.0));
    std::vector<Item> merged;
    std::vector<BaseSegment> window;
    auto flush = [&]() {
      if (window.empty()) return;
      const auto out = receding_horizon_smooth(ctx.model, terrain, window, horizon, seg_opt);
      for (const auto& s : out)
        merged.push_back({s.is_turn ? "turn" : "slide", s.traj, s.q});
      window.clear();
    };
    for (const auto& it : items) {
      if (it.kind == "reconfigure") {
        flush();
        merged.push_back(it);
      } else {
        window.push_back({it.traj, it.q, it.kind == "turn"});
      }
    }
    flush();
    items = std::move(merged);
  }
  double t_after = 0.0;
  for (const auto& it : items) t_after += it.traj.t_f;
  summary["t_total_smoothed"] = t_after;
  summary["smoothed"] = smooth;

  // concatenated trajectory and ZMP records on a global clock
  Csv traj(ctx.out / "trajectory.csv",
           "t,segment,kind,x,y,v,heading,heading_rate,u_a,u_psi,x_zmp,y_zmp,margin");
  Csv zmp(ctx.out / "zmp.csv", "t,x_zmp,y_zmp,margin");
  double t_base = 0.0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double mean_abs_x_traj = 0.0;
  size_t n_samples = 0;
  for (size_t s = 0; s < items.size(); ++s) {
    const Item& it = items[s];
    const double kind_code = it.kind == "slide" ? 0.0 : it.kind == "turn" ? 1.0 : 2.0;
    for (size_t k = 0; k < it.traj.t.size(); ++k) {
      const double t = t_base + it.traj.t[k];
      double x = 0, y = 0, v = 0, h = 0, hr = 0, ua = 0, up = 0;
      if (it.kind != "reconfigure") {
        x = it.traj.x[k](0);
        y = it.traj.x[k](1);
        v = it.traj.x[k](2);
        h = it.traj.x[k](3);
        hr = it.traj.x[k](4);
        ua = it.traj.u[k](0);
        up = it.traj.u[k](1);
      }
      const double mzmp_x = k < it.traj.zmp_x.size() ? it.traj.zmp_x[k] : 0.0;
      const double mzmp_y = k < it.traj.zmp_y.size() ? it.traj.zmp_y[k] : 0.0;
      const double mg = k < it.traj.margin.size() ? it.traj.margin[k] : 0.0;
      traj.row({t, static_cast<double>(s), kind_code, x, y, v, h, hr, ua, up, mzmp_x,
                mzmp_y, mg});
      zmp.row({t, mzmp_x, mzmp_y, mg});
      worst_margin = std::min(worst_margin, mg);
      mean_abs_x_traj += std::abs(mzmp_x);
      ++n_samples;
    }
    t_base += it.traj.t_f;
  }

  // independent fine re-simulation at 10x mesh density
  Csv resim(ctx.out / "resim.csv", "t,margin");
  double resim_worst = std::numeric_limits<double>::infinity();
  t_base = 0.0;
  for (const Item& it : items) {
    if (it.kind == "reconfigure") {
      const BaseAttitude att = it.att;
      resim_segment(
          it.traj, 4, t_base, 10,
          [&](const VectorXd& x, const Eigen::Vector2d& u) {
            return arm_state_margin(ctx.model, att, g, x.head<4>(), u);
          },
          [](const VectorXd& x, const Eigen::Vector2d& u) {
            return (VectorXd(4) << x(1), u(0), x(3), u(1)).finished();
          },
          resim, resim_worst);
    } else {
      resim_segment(
          it.traj, 5, t_base, 10,
          [&](const VectorXd& x, const Eigen::Vector2d& u) {
            return base_state_margin(ctx.model, terrain, it.q, x, u);
          },
          [&](const VectorXd& x, const Eigen::Vector2d& u) {
            Vec2 dir(-std::sin(x(3)), std::cos(x(3)));
            try {
              const BaseAttitude att = terrain.base_attitude(x(0), x(1), x(3));
              dir = Vec2(att.R(0, 1), att.R(1, 1));
            } catch (const OutOfBounds&) {
            }
            return (VectorXd(5) << x(2) * dir.x(), x(2) * dir.y(), u(0), x(4), u(1))
                .finished();
          },
          resim, resim_worst);
    }
    t_base += it.traj.t_f;
  }
  summary["resim_min_margin"] = resim_worst;

  summary["min_margin"] = worst_margin;
  summary["mean_abs_x_zmp_trajectory"] = mean_abs_x_traj / std::max<size_t>(1, n_samples);
  summary["status"] = "ok";
  write_json_file(ctx.out / "summary.json", summary);
  return 0;
}

// --- monte_carlo ----------------------------------------------------------

int run_monte_carlo(Context& ctx) {
  const json& jm = require_field(ctx.scn, "monte_carlo", "scenario");
  const double g = num_or(ctx.scn, "gravity", 9.81);
  const double d = num_or(jm, "d", 3.27);
  int samples = static_cast<int>(num_or(jm, "samples", 100.0));
  if (ctx.opts.samples) samples = *ctx.opts.samples;
  std::vector<double> rolls;
  for (const auto& r : require_field(jm, "roll_deg", "monte_carlo"))
    rolls.push_back(r.get<double>());

  ManipulationOptions man_opt;
  man_opt.N = static_cast<int>(num_or(jm, "N", 24.0));
  man_opt.solver.max_inner = 800;

  struct Sample {
    double q1_0 = 0.0, q1_f = 0.0, t_f = 0.0;
    bool success = false;
  };
  std::vector<std::vector<Sample>> results(rolls.size(), std::vector<Sample>(samples));

  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  for (size_t ai = 0; ai < rolls.size(); ++ai) {
    const BaseAttitude att = attitude_from_pitch_roll(0.0, rolls[ai] * M_PI / 180.0);
    auto work = [&, ai](unsigned w) {
      for (int si = static_cast<int>(w); si < samples; si += static_cast<int>(workers)) {
        std::mt19937_64 rng(ctx.seed * 0x9E3779B97F4A7C15ULL + ai * 1000003ULL +
                            static_cast<std::uint64_t>(si));
        std::uniform_real_distribution<double> uq(-2.0 * M_PI, 2.0 * M_PI);
        Sample& s = results[ai][si];
        s.q1_0 = uq(rng);
        s.q1_f = uq(rng);
        try {
          const Trajectory tr = solve_manipulation_ocp(
              ctx.model, {s.q1_0, 0.0, d, 0.0}, {s.q1_f, 0.0, d, 0.0}, att, g, man_opt);
          s.success = tr.ok();
          s.t_f = tr.t_f;
        } catch (const std::runtime_error&) {
          s.success = false;
        }
      }
    };
    std::vector<std::future<void>> futs;
    for (unsigned w = 0; w < workers; ++w)
      futs.push_back(std::async(std::launch::async, work, w));
    for (auto& f : futs) f.get();
  }

  Csv csv(ctx.out / "montecarlo.csv", "roll_deg,sample,q1_0,q1_f,success,t_f");
  json rates = json::array();
  for (size_t ai = 0; ai < rolls.size(); ++ai) {
    int ok = 0;
    for (int si = 0; si < samples; ++si) {
      const Sample& s = results[ai][si];
      csv.row({rolls[ai], static_cast<double>(si), s.q1_0, s.q1_f,
               s.success ? 1.0 : 0.0, s.t_f});
      ok += s.success ? 1 : 0;
    }
    rates.push_back({{"roll_deg", rolls[ai]},
                     {"success_rate", static_cast<double>(ok) / samples}});
  }
  json summary;
  summary["mode"] = "monte_carlo";
  summary["samples"] = samples;
  summary["rates"] = rates;
  write_json_file(ctx.out / "summary.json", summary);
  return 0;
}

}  // namespace

int run_scenario(const std::string& scenario_path, const RunOptions& options) {
  Context ctx;
  ctx.opts = options;
  ctx.scn = load_json_file(scenario_path);
  ctx.scn_dir = fs::path(scenario_path).parent_path();
  if (!ctx.scn.contains("version") || ctx.scn["version"].get<int>() != 1)
    throw ConfigError("scenario requires \"version\": 1");
  const std::string mode = require_field(ctx.scn, "mode", "scenario").get<std::string>();
  const std::string robot =
      require_field(ctx.scn, "robot", "scenario").get<std::string>();
  const fs::path robot_path =
      fs::path(robot).is_absolute() ? fs::path(robot) : ctx.scn_dir / robot;
  try {
    ctx.model = RobotModel::from_json_file(robot_path.string());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("robot file: ") + e.what());
  }
  ctx.seed = options.seed ? *options.seed
                          : static_cast<std::uint64_t>(num_or(ctx.scn, "seed", 0.0));
  ctx.out = options.out_dir.empty()
                ? ctx.scn_dir / ctx.scn.value("out_dir", std::string("out"))
                : fs::path(options.out_dir);
  fs::create_directories(ctx.out);

  if (mode == "manipulate") return run_manipulate(ctx);
  if (mode == "relocate") return run_relocate(ctx);
  if (mode == "monte_carlo") return run_monte_carlo(ctx);
  if (mode == "baseline_compare") return run_baseline_compare(ctx);
  throw ConfigError("unknown mode '" + mode + "'");
}

}  // namespace tmm
