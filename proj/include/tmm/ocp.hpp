#pragma once

#include <functional>
#include <vector>

#include "tmm/geometry.hpp"

namespace tmm {

/// Minimum-time optimal control problem
///   min T  s.t.  x' = f(x, u), x(0) = x0, mask o (x(T) - xf) = 0,
///                c(x, u) <= 0 at grid points, u in [u_lo, u_hi], T in [t_lo, t_hi]
/// transcribed on a uniform grid of N intervals with implicit trapezoidal
/// integration (the state sequence is an exact solution of the discrete
/// dynamics; only inputs and the final time are decision variables).
struct OcpProblem {
  int nx = 0;
  int nu = 0;
  int nc = 0;  // path constraint count, c <= 0
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> dynamics;
  // Evaluated at every grid node; the node index lets boundary or waypoint
  // nodes carry different constraints than interior ones.
  std::function<Eigen::VectorXd(int, const Eigen::VectorXd&, const Eigen::VectorXd&)> path;

  Eigen::VectorXd x0;
  Eigen::VectorXd xf;
  Eigen::VectorXd xf_mask;  // 1 for constrained terminal components, 0 for free
  Eigen::VectorXd u_lo, u_hi;
  double t_lo = 1e-2, t_hi = 120.0;
  int N = 40;
};

enum class TrajStatus { Optimal, Feasible, Failed };

struct Trajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> u;
  double t_f = 0.0;
  TrajStatus status = TrajStatus::Failed;
  double max_violation = 0.0;
  int outer_iters = 0;
  int inner_iters = 0;

  // Per-node stability record, filled by the callers that know the model.
  std::vector<double> zmp_x, zmp_y, margin;

  bool ok() const { return status != TrajStatus::Failed; }
};

struct SolveOptions {
  int max_outer = 25;
  int max_inner = 400;
  double constraint_tol = 1e-6;
  double accept_tol = 1e-5;    // worst violation still reported Feasible
  double grad_tol = 1e-5;      // projected-gradient stop on the inner solver
  double rho0 = 10.0;
  double rho_growth = 4.0;
  double rho_max = 1e8;
};

/// Warm start: inputs sampled onto the grid plus an initial final time.
struct OcpGuess {
  std::vector<Eigen::VectorXd> u;  // N + 1 entries (clamped/resampled if not)
  double t_f = 0.0;
};

Trajectory solve_ocp(const OcpProblem& problem, const SolveOptions& options,
                     const OcpGuess* guess = nullptr);

/// Worst trapezoidal defect of a trajectory, for invariant checks.
double trapezoidal_defect(const OcpProblem& problem, const Trajectory& traj);

}  // namespace tmm
