// End-to-end acceptance gate. Runs the ten release criteria in order and
// prints one pass/fail line each; the exit status is the number of failures.
// Criteria 7-9 drive the shipped scenario files through the scenario runner
// and criterion 10 reruns them to check byte-level determinism.

#include <json.hpp>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tmm/base_motion.hpp"
#include "tmm/planner.hpp"
#include "tmm/scenario.hpp"
#include "tmm/trajopt.hpp"

using namespace tmm;
using Eigen::VectorXd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string g_note;
int g_failures = 0;

void notef(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  g_note = buf;
}

void report(int id, bool pass, double seconds, double budget) {
  const bool in_budget = budget <= 0.0 || seconds < budget;
  if (!pass || !in_budget) ++g_failures;
  std::printf("criterion %2d: %s  (%.1f s%s)  %s\n", id,
              pass && in_budget ? "PASS" : "FAIL", seconds,
              in_budget ? "" : ", over budget", g_note.c_str());
  std::fflush(stdout);
  g_note.clear();
}

template <typename F>
void run(int id, double budget, F f) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  try {
    pass = f();
  } catch (const std::exception& e) {
    notef("exception: %s", e.what());
  }
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, pass, s, budget);
}

RobotModel the_model() {
  return RobotModel::from_json_file(std::string(TMM_DATA_DIR) +
                                    "/robots/feller_buncher.json");
}

std::string scenario_path(const char* name) {
  return std::string(TMM_DATA_DIR) + "/scenarios/" + name;
}

// --- shared random helpers ------------------------------------------------

struct RandomSystem {
  std::vector<double> masses;
  std::vector<Vec3> pos, acc;
};

RandomSystem random_system(std::mt19937_64& rng, double accel_scale) {
  std::uniform_real_distribution<double> mass(10.0, 5000.0), coord(-3.0, 3.0),
      z(0.2, 6.0), a(-accel_scale, accel_scale);
  std::uniform_int_distribution<int> count(2, 10);
  RandomSystem s;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    s.masses.push_back(mass(rng));
    s.pos.emplace_back(coord(rng), coord(rng), z(rng));
    s.acc.emplace_back(a(rng), a(rng), a(rng));
  }
  return s;
}

Vec3 random_tilted_gravity(std::mt19937_64& rng, double max_slope) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double slope = max_slope * u(rng);
  const double dir = 2.0 * M_PI * u(rng);
  return 9.81 * Vec3(std::sin(slope) * std::cos(dir), std::sin(slope) * std::sin(dir),
                     std::cos(slope));
}

VectorXd random_arm(const RobotModel& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> q1(-M_PI, M_PI), d(0.5, 3.4);
  return simplified_to_full(m, {q1(rng), 0.0, d(rng), 0.0}, {}).q;
}

// Full-model margin of a reduced arm state on a static base, assembled from
// the public kinematics pieces (not the solver's internal helper).
double arm_margin(const RobotModel& m, const BaseAttitude& att, double g,
                  const Eigen::Vector4d& x, const Eigen::Vector2d& u) {
  const MappedJoints mj = simplified_to_full(m, {x(0), x(1), x(2), x(3)}, {u(0), u(1)});
  const LinkKinematics kin = link_kinematics(m, mj.q, mj.qd, mj.qdd);
  const ZmpPoint zmp =
      zmp_dynamic(m.masses(), kin.p, kin.a, gravity_in_base(att, g));
  return contains(m.support_polygon, zmp).margins.margin;
}

// RK4 re-simulation of a manipulation trajectory at `refine`x density;
// returns the worst margin seen between mesh points.
double resim_arm_min_margin(const RobotModel& m, const BaseAttitude& att, double g,
                            const Trajectory& tr, int refine) {
  const int n = static_cast<int>(tr.t.size());
  if (n < 2) return arm_margin(m, att, g, tr.x.front().head<4>(), Eigen::Vector2d::Zero());
  auto u_at = [&](double t) -> Eigen::Vector2d {
    if (t <= tr.t.front()) return tr.u.front().head<2>();
    if (t >= tr.t.back()) return tr.u.back().head<2>();
    const auto it = std::upper_bound(tr.t.begin(), tr.t.end(), t);
    const size_t k = it - tr.t.begin() - 1;
    const double s = (t - tr.t[k]) / (tr.t[k + 1] - tr.t[k]);
    return ((1.0 - s) * tr.u[k] + s * tr.u[k + 1]).head<2>();
  };
  auto rhs = [&](const Eigen::Vector4d& x, const Eigen::Vector2d& u) {
    return Eigen::Vector4d(x(1), u(0), x(3), u(1));
  };
  Eigen::Vector4d x = tr.x.front().head<4>();
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < n; ++k) {
    const double h = (tr.t[k + 1] - tr.t[k]) / refine;
    if (h <= 0.0) continue;
    for (int i = 0; i < refine; ++i) {
      const double t = tr.t[k] + i * h;
      const Eigen::Vector4d k1 = rhs(x, u_at(t));
      const Eigen::Vector4d k2 = rhs(x + 0.5 * h * k1, u_at(t + 0.5 * h));
      const Eigen::Vector4d k3 = rhs(x + 0.5 * h * k2, u_at(t + 0.5 * h));
      const Eigen::Vector4d k4 = rhs(x + h * k3, u_at(t + h));
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      worst = std::min(worst, arm_margin(m, att, g, x, u_at(t + h)));
    }
  }
  return worst;
}

// --- CSV / file helpers ---------------------------------------------------

std::vector<std::vector<double>> read_csv(const fs::path& path,
                                          std::vector<std::string>* header = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    if (first) {
      first = false;
      if (header) {
        while (std::getline(ss, cell, ',')) header->push_back(cell);
      }
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

int column(const std::vector<std::string>& header, const std::string& name) {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw std::runtime_error("missing column " + name);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

}  // namespace

int main() {
  const fs::path out_root = fs::path("acceptance_out");
  fs::create_directories(out_root);
  const RobotModel model = the_model();
  const double g = 9.81;

  // 1: dynamic ZMP vs an independent Newton-Euler moment balance
  run(1, 10.0, [&] {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const RandomSystem s = random_system(rng, 3.0);
      const Vec3 grav = random_tilted_gravity(rng, 40.0 * M_PI / 180.0);
      const ZmpPoint p = zmp_dynamic(s.masses, s.pos, s.acc, grav);
      // oracle: net moment about (px, py, 0) of m(a + g) has no horizontal part
      Vec3 force = Vec3::Zero(), torque = Vec3::Zero();
      for (size_t i = 0; i < s.masses.size(); ++i) {
        const Vec3 f = s.masses[i] * (s.acc[i] + grav);
        force += f;
        torque += s.pos[i].cross(f);
      }
      const Vec2 want(-torque.y() / force.z(), torque.x() / force.z());
      const double rel = (p.vec() - want).norm() / (1.0 + want.norm());
      worst = std::max(worst, rel);
      if (rel >= 1e-9) {
        notef("trial %d relative error %.3e", trial, rel);
        return false;
      }
    }
    notef("1000 systems, worst relative error %.2e", worst);
    return true;
  });

  // 2: turn-arc envelope, dense rotated-gravity sweep
  run(2, 30.0, [&] {
    TerrainModel terrain = TerrainModel::sinusoidal_mountain(10.0, 10.0);
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> coord(5.0, 40.0), ang(-M_PI, M_PI);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto pos = link_com_positions(model, random_arm(model, rng));
      const MassAggregates agg = MassAggregates::from_points(model.masses(), pos);
      const BaseAttitude att = terrain.base_attitude(coord(rng), coord(rng), ang(rng));
      const Vec3 grav = gravity_in_base(att, g);
      const ZmpEnvelope env = turn_envelope(agg, att.R, 2.0 * M_PI);
      if (env.kind != ZmpEnvelope::Kind::Arc) {
        notef("trial %d: not an arc", trial);
        return false;
      }
      double prev = env.arc.start_angle;
      const int steps = 1000;
      for (int i = 0; i <= steps; ++i) {
        const double psi = 2.0 * M_PI * i / steps;
        const double c = std::cos(psi), s = std::sin(psi);
        const Vec3 gt(c * grav.x() + s * grav.y(), -s * grav.x() + c * grav.y(),
                      grav.z());
        const ZmpPoint p = zmp_quasistatic(agg, gt);
        const Vec2 rel = p.vec() - env.arc.center;
        const double err = std::abs(rel.norm() - env.arc.radius);
        worst = std::max(worst, err);
        if (err >= 1e-10) {
          notef("trial %d: off-arc by %.3e", trial, err);
          return false;
        }
        if (env.arc.radius > 1e-6 && i > 0) {
          const double a = std::atan2(rel.y(), rel.x());
          if (wrap_angle(a - prev) >= 0.0) {
            notef("trial %d: non-monotone arc angle at step %d", trial, i);
            return false;
          }
          prev = a;
        } else if (env.arc.radius > 1e-6) {
          prev = std::atan2(rel.y(), rel.x());
        }
      }
    }
    notef("100 sweeps x 1001 samples, worst off-arc %.2e m", worst);
    return true;
  });

  // 3: relocation rectangle over dense monotone ramps
  run(3, 30.0, [&] {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> u(-1.0, 1.0),
        slope(0.0, 30.0 * M_PI / 180.0);
    const double cap = 5.0 * M_PI / 180.0;
    const double inflation = 0.01 * model.support_polygon.width_x();
    for (int trial = 0; trial < 100; ++trial) {
      const auto pos = link_com_positions(model, random_arm(model, rng));
      const MassAggregates agg = MassAggregates::from_points(model.masses(), pos);
      const Mat3 ra =
          rotation_zxy(M_PI * u(rng), slope(rng) * u(rng), slope(rng) * u(rng));
      const double theta_r = cap * u(rng), phi_r = cap * u(rng);
      auto ramp = [&](double t) {
        Mat3 rx, ry;
        const double ct = std::cos(t * theta_r), st = std::sin(t * theta_r);
        const double cp = std::cos(t * phi_r), sp = std::sin(t * phi_r);
        rx << 1, 0, 0, 0, ct, -st, 0, st, ct;
        ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
        return Mat3(ra * rx * ry);
      };
      const ZmpEnvelope env = relocation_envelope(agg, ramp(0.0), ramp(1.0), g, inflation);
      for (int i = 0; i <= 1000; ++i) {
        const Vec3 gt = ramp(i / 1000.0).transpose() * Vec3(0.0, 0.0, g);
        const ZmpPoint p = zmp_quasistatic(agg, gt);
        if (p.x < env.rect.lo.x() || p.x > env.rect.hi.x() || p.y < env.rect.lo.y() ||
            p.y > env.rect.hi.y()) {
          notef("trial %d: sample %d outside the rectangle", trial, i);
          return false;
        }
      }
    }
    notef("100 ramps x 1001 samples inside the inflated rectangle");
    return true;
  });

  // 4: analytic deviation bounds dominate the measured dynamic deviation
  run(4, 30.0, [&] {
    std::mt19937_64 rng(104);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto masses = model.masses();
    double slack = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 500; ++trial) {
      const auto pos = link_com_positions(model, random_arm(model, rng));
      const MassAggregates agg = MassAggregates::from_points(masses, pos);
      const Vec3 grav = random_tilted_gravity(rng, 30.0 * M_PI / 180.0);
      const ZmpPoint qs = zmp_quasistatic(agg, grav);
      const double u_a = 2.0 * u(rng);
      const double psi_dot = 2.0 * u(rng);
      const double u_psi = (2.0 / 3.0) * u(rng);
      const DeviationBounds b =
          dynamic_deviation_bounds(masses, pos, grav.z(), u_a, psi_dot, u_psi);
      std::vector<Vec3> acc(pos.size(), Vec3(0.0, u_a, 0.0));
      ZmpPoint dyn = zmp_dynamic(masses, pos, acc, grav);
      double dev = (dyn.vec() - qs.vec()).norm();
      if (dev > b.forward + 1e-9) {
        notef("trial %d: forward deviation %.4f > bound %.4f", trial, dev, b.forward);
        return false;
      }
      slack = std::min(slack, b.forward - dev);
      for (size_t i = 0; i < pos.size(); ++i) {
        acc[i] = Vec3(-psi_dot * psi_dot * pos[i].x() - u_psi * pos[i].y(),
                      -psi_dot * psi_dot * pos[i].y() + u_psi * pos[i].x(), 0.0);
      }
      dyn = zmp_dynamic(masses, pos, acc, grav);
      dev = (dyn.vec() - qs.vec()).norm();
      if (dev > b.turn + 1e-9) {
        notef("trial %d: turn deviation %.4f > bound %.4f", trial, dev, b.turn);
        return false;
      }
      slack = std::min(slack, b.turn - dev);
    }
    notef("500 sweeps bounded, minimum slack %.3f m", slack);
    return true;
  });

  // 5: test case 1, 30 degree roll, 180 degree cabin yaw
  run(5, 60.0, [&] {
    const BaseAttitude att = attitude_from_pitch_roll(0.0, 30.0 * M_PI / 180.0);
    const SimplifiedState x0{0.0, 0.0, 3.27, 0.0}, xf{M_PI, 0.0, 3.27, 0.0};
    const Trajectory tr = solve_manipulation_ocp(model, x0, xf, att, g);
    if (tr.t_f < 4.5 || tr.t_f > 6.0) {
      notef("t_f = %.3f outside [4.5, 6.0]", tr.t_f);
      return false;
    }
    const double worst = resim_arm_min_margin(model, att, g, tr, 10);
    if (worst < 0.0) {
      notef("re-simulated margin %.4f < 0", worst);
      return false;
    }
    const MappedJoints m0 = simplified_to_full(model, x0, {});
    const MappedJoints m1 = simplified_to_full(model, xf, {});
    const Trajectory base =
        phase_plane_baseline(model, m0.q, m1.q, model.joint_limits, att, g);
    if (std::abs(base.t_f - 4.5) > 0.05) {
      notef("baseline t_f = %.3f not 4.5 +- 0.05", base.t_f);
      return false;
    }
    double base_min = std::numeric_limits<double>::infinity();
    for (double m : base.margin) base_min = std::min(base_min, m);
    if (base_min >= 0.0) {
      notef("baseline locus never exits the polygon (min margin %.4f)", base_min);
      return false;
    }
    notef("t_f = %.3f s, re-sim margin >= %.4f; baseline t_f = %.3f s exits by %.3f m",
          tr.t_f, worst, base.t_f, -base_min);
    return true;
  });

  // 6: test case 2, combined arm motion and base back-up
  run(6, 60.0, [&] {
    const BaseAttitude att =
        attitude_from_pitch_roll(15.0 * M_PI / 180.0, 15.0 * M_PI / 180.0);
    const SimplifiedState x0{0.0, 0.0, 3.27, 0.0}, xf{M_PI / 2.0, 0.0, 2.0, 0.0};
    const Trajectory tr = solve_manipulation_ocp(model, x0, xf, att, g);
    const double arm_worst = resim_arm_min_margin(model, att, g, tr, 10);
    // worst-case aggregates over the plan
    MassAggregates agg;
    std::vector<ZmpPoint> locus;
    for (size_t k = 0; k < tr.t.size(); ++k) {
      const MappedJoints mj =
          simplified_to_full(model, {tr.x[k](0), 0.0, tr.x[k](2), 0.0}, {});
      const auto a =
          MassAggregates::from_points(model.masses(), link_com_positions(model, mj.q));
      agg.M = a.M;
      agg.Mz = std::max(agg.Mz, a.Mz);
      locus.push_back({tr.zmp_x[k], tr.zmp_y[k]});
    }
    const double g_z = gravity_in_base(att, g).z();
    auto bounds = base_accel_bounds(locus, model.support_polygon, agg, g_z);
    if (!(bounds.first < 0.0 && bounds.second > 0.0)) {
      notef("acceleration interval [%.3f, %.3f] empty or one-sided", bounds.first,
            bounds.second);
      return false;
    }
    bounds.first = std::max(bounds.first * 0.9, -model.base_limits.u_a);
    bounds.second = std::min(bounds.second * 0.9, model.base_limits.u_a);
    const Trajectory prof =
        bang_bang_base(-5.0, bounds, model.base_limits.v_max, 801);
    double u_min = 0.0, u_max = 0.0;
    for (const auto& uk : prof.u) {
      u_min = std::min(u_min, uk(0));
      u_max = std::max(u_max, uk(0));
    }
    if (std::abs(u_min - bounds.first) > 1e-9 || std::abs(u_max - bounds.second) > 1e-9) {
      notef("profile does not saturate the interval: [%.3f, %.3f] vs [%.3f, %.3f]",
            u_min, u_max, bounds.first, bounds.second);
      return false;
    }
    // combined re-simulation: arm phase, then back-up with the arm frozen
    if (arm_worst < 0.0) {
      notef("arm phase margin %.4f < 0", arm_worst);
      return false;
    }
    const MappedJoints mf = simplified_to_full(model, xf, {});
    const auto pos = link_com_positions(model, mf.q);
    const Vec3 grav = gravity_in_base(att, g);
    double base_worst = std::numeric_limits<double>::infinity();
    for (const auto& uk : prof.u) {
      const std::vector<Vec3> acc(pos.size(), Vec3(0.0, uk(0), 0.0));
      const ZmpPoint p = zmp_dynamic(model.masses(), pos, acc, grav);
      base_worst = std::min(base_worst, contains(model.support_polygon, p).margins.margin);
    }
    if (base_worst < 0.0) {
      notef("back-up phase margin %.4f < 0", base_worst);
      return false;
    }
    notef("interval [%.3f, %.3f] m/s^2 saturated; margins arm %.4f, base %.4f",
          bounds.first, bounds.second, arm_worst, base_worst);
    return true;
  });

  // 7: relocation scenario end to end
  const fs::path reloc_a = out_root / "relocate";
  bool reloc_ok = false;
  run(7, 600.0, [&] {
    RunOptions opts;
    opts.out_dir = reloc_a.string();
    const int rc = run_scenario(scenario_path("relocate_sinusoidal.json"), opts);
    if (rc != 0) {
      notef("scenario runner exit %d", rc);
      return false;
    }
    const json s = read_json(reloc_a / "summary.json");
    if (!s.at("found").get<bool>()) {
      notef("no path found");
      return false;
    }
    if (s.at("reconfigurations").get<int>() < 1) {
      notef("no reconfiguration event on the path");
      return false;
    }
    if (s.at("iterations").get<int>() > 50000) {
      notef("iterations %d > 50000", s.at("iterations").get<int>());
      return false;
    }
    const double before = s.at("t_total_segments").get<double>();
    const double after = s.at("t_total_smoothed").get<double>();
    if (!(after < before)) {
      notef("smoothing did not strictly improve: %.3f vs %.3f", after, before);
      return false;
    }
    std::vector<std::string> hdr;
    const auto rows = read_csv(reloc_a / "trajectory.csv", &hdr);
    const int cv = column(hdr, "v"), chr = column(hdr, "heading_rate"),
              cua = column(hdr, "u_a"), cup = column(hdr, "u_psi");
    const double tol = 1e-6;
    for (const auto& r : rows) {
      if (std::abs(r[cv]) > model.base_limits.v_max + tol ||
          std::abs(r[chr]) > model.base_limits.psi_dot + tol ||
          std::abs(r[cua]) > model.base_limits.u_a + tol ||
          std::abs(r[cup]) > model.base_limits.u_psi + tol) {
        notef("state or input bound violated at t = %.3f", r[0]);
        return false;
      }
    }
    const auto resim = read_csv(reloc_a / "resim.csv");
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : resim) worst = std::min(worst, r[1]);
    if (worst < 0.0) {
      notef("fine re-simulation margin %.4f < 0", worst);
      return false;
    }
    reloc_ok = true;
    notef("path found, %d reconfiguration(s), %.1f s -> %.1f s, re-sim margin >= %.4f",
          s.at("reconfigurations").get<int>(), before, after, worst);
    return true;
  });

  // 8: traction optimization lowers the mean |x_zmp| off the centerline
  const fs::path reloc_b = out_root / "relocate_notraction";
  bool reloc_b_ok = false;
  run(8, 600.0, [&] {
    RunOptions opts;
    opts.out_dir = reloc_b.string();
    opts.no_traction_opt = true;
    const int rc = run_scenario(scenario_path("relocate_sinusoidal.json"), opts);
    if (rc != 0) {
      notef("no-traction run exit %d", rc);
      return false;
    }
    if (!reloc_ok) {
      notef("traction-on run unavailable");
      return false;
    }
    const double with_opt =
        read_json(reloc_a / "summary.json").at("mean_abs_x_zmp_path").get<double>();
    const double without =
        read_json(reloc_b / "summary.json").at("mean_abs_x_zmp_path").get<double>();
    reloc_b_ok = true;
    notef("mean |x_zmp|: %.4f m with traction opt, %.4f m without", with_opt, without);
    return with_opt <= without;
  });

  // 9: Monte Carlo success-rate trend
  const fs::path mc_a = out_root / "montecarlo";
  bool mc_ok = false;
  run(9, 900.0, [&] {
    RunOptions opts;
    opts.out_dir = mc_a.string();
    const int rc = run_scenario(scenario_path("montecarlo.json"), opts);
    if (rc != 0) {
      notef("monte carlo run exit %d", rc);
      return false;
    }
    const json s = read_json(mc_a / "summary.json");
    std::vector<double> rates;
    for (const auto& r : s.at("rates")) rates.push_back(r.at("success_rate").get<double>());
    if (rates.size() != 4) {
      notef("expected 4 attitudes, got %zu", rates.size());
      return false;
    }
    for (size_t i = 1; i < rates.size(); ++i) {
      if (rates[i] > rates[i - 1] + 1e-12) {
        notef("trend not monotone: %.2f %.2f %.2f %.2f", rates[0], rates[1], rates[2],
              rates[3]);
        return false;
      }
    }
    if (rates[0] < 0.9) {
      notef("0 degree rate %.2f < 0.9", rates[0]);
      return false;
    }
    mc_ok = true;
    notef("rates %.2f / %.2f / %.2f / %.2f", rates[0], rates[1], rates[2], rates[3]);
    return rates[3] <= rates[2];
  });

  // 10: byte-identical reruns with the same seed
  run(10, 0.0, [&] {
    if (!reloc_ok || !reloc_b_ok || !mc_ok) {
      notef("skipped: prerequisite runs failed");
      return false;
    }
    struct Rerun {
      const char* scenario;
      fs::path first;
      fs::path second;
      bool no_traction;
      std::vector<const char*> files;
    };
    const std::vector<const char*> reloc_files{"path.csv", "trajectory.csv", "zmp.csv",
                                               "resim.csv", "certificates.json"};
    std::vector<Rerun> reruns{
        {"relocate_sinusoidal.json", reloc_a, out_root / "relocate_rerun", false,
         reloc_files},
        {"relocate_sinusoidal.json", reloc_b, out_root / "relocate_notraction_rerun",
         true, reloc_files},
        {"montecarlo.json", mc_a, out_root / "montecarlo_rerun", false,
         {"montecarlo.csv"}},
    };
    for (const auto& rr : reruns) {
      RunOptions opts;
      opts.out_dir = rr.second.string();
      opts.no_traction_opt = rr.no_traction;
      const int rc = run_scenario(scenario_path(rr.scenario), opts);
      if (rc != 0) {
        notef("rerun of %s exit %d", rr.scenario, rc);
        return false;
      }
      for (const char* f : rr.files) {
        if (!same_bytes(rr.first / f, rr.second / f)) {
          notef("%s differs between reruns of %s", f, rr.scenario);
          return false;
        }
      }
    }
    notef("all rerun outputs byte-identical");
    return true;
  });

  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures;
}
