#include "tmm/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace tmm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& fn, const VectorXd& at,
                     int rows) {
  MatrixXd j(rows, at.size());
  for (int i = 0; i < at.size(); ++i) {
    const double eps = 1e-7 * (1.0 + std::abs(at(i)));
    VectorXd p = at, m = at;
    p(i) += eps;
    m(i) -= eps;
    j.col(i) = (fn(p) - fn(m)) / (2.0 * eps);
  }
  return j;
}

struct Multipliers {
  MatrixXd path;     // nc x (N+1)
  VectorXd terminal;  // nx
  double rho = 10.0;
};

struct Rollout {
  std::vector<VectorXd> x, f, c;
  double L = 0.0;
};

// Penalty value of one inequality constraint under the augmented Lagrangian.
double al_term(double c, double lambda, double rho) {
  const double t = lambda + rho * c;
  if (t > 0.0) return lambda * c + 0.5 * rho * c * c;
  return -0.5 * lambda * lambda / rho;
}

class Transcription {
 public:
  Transcription(const OcpProblem& p, const Multipliers& mul) : p_(p), mul_(mul) {}

  Rollout rollout(const std::vector<VectorXd>& u, double T) const {
    const double h = T / p_.N;
    Rollout r;
    r.x.resize(p_.N + 1);
    r.f.resize(p_.N + 1);
    r.c.resize(p_.N + 1);
    r.x[0] = p_.x0;
    r.f[0] = p_.dynamics(r.x[0], u[0]);
    for (int k = 0; k < p_.N; ++k) {
      VectorXd y = r.x[k] + h * r.f[k];  // explicit predictor
      VectorXd fy = p_.dynamics(y, u[k + 1]);
      for (int it = 0; it < 20; ++it) {
        const VectorXd res = y - r.x[k] - 0.5 * h * (r.f[k] + fy);
        if (res.norm() < 1e-13 * (1.0 + y.norm())) break;
        const MatrixXd fx = fd_jacobian(
            [&](const VectorXd& xx) { return p_.dynamics(xx, u[k + 1]); }, y, p_.nx);
        const MatrixXd jac = MatrixXd::Identity(p_.nx, p_.nx) - 0.5 * h * fx;
        y -= jac.partialPivLu().solve(res);
        fy = p_.dynamics(y, u[k + 1]);
      }
      r.x[k + 1] = y;
      r.f[k + 1] = fy;
    }

    r.L = T;
    for (int k = 0; k <= p_.N; ++k) {
      if (p_.nc > 0) {
        r.c[k] = p_.path(k, r.x[k], u[k]);
        for (int j = 0; j < p_.nc; ++j)
          r.L += al_term(r.c[k](j), mul_.path(j, k), mul_.rho);
      }
    }
    for (int i = 0; i < p_.nx; ++i) {
      if (p_.xf_mask(i) == 0.0) continue;
      const double e = r.x[p_.N](i) - p_.xf(i);
      r.L += mul_.terminal(i) * e + 0.5 * mul_.rho * e * e;
    }
    return r;
  }

  // Gradient of the augmented Lagrangian with respect to (u_0..u_N, T) via
  // the discrete adjoint of the implicit trapezoidal transition.
  void gradient(const std::vector<VectorXd>& u, double T, const Rollout& r,
                std::vector<VectorXd>& gu, double& gT) const {
    const double h = T / p_.N;
    std::vector<MatrixXd> fx(p_.N + 1), fu(p_.N + 1);
    for (int k = 0; k <= p_.N; ++k) {
      fx[k] = fd_jacobian([&](const VectorXd& xx) { return p_.dynamics(xx, u[k]); }, r.x[k],
                          p_.nx);
      fu[k] = fd_jacobian([&](const VectorXd& uu) { return p_.dynamics(r.x[k], uu); }, u[k],
                          p_.nx);
    }

    // Direct derivatives of the per-node penalty terms.
    std::vector<VectorXd> lx(p_.N + 1, VectorXd::Zero(p_.nx));
    gu.assign(p_.N + 1, VectorXd::Zero(p_.nu));
    if (p_.nc > 0) {
      for (int k = 0; k <= p_.N; ++k) {
        VectorXd psi(p_.nc);
        for (int j = 0; j < p_.nc; ++j)
          psi(j) = std::max(0.0, mul_.path(j, k) + mul_.rho * r.c[k](j));
        if (psi.isZero()) continue;
        const MatrixXd cx = fd_jacobian(
            [&](const VectorXd& xx) { return p_.path(k, xx, u[k]); }, r.x[k], p_.nc);
        const MatrixXd cu = fd_jacobian(
            [&](const VectorXd& uu) { return p_.path(k, r.x[k], uu); }, u[k], p_.nc);
        lx[k] = cx.transpose() * psi;
        gu[k] = cu.transpose() * psi;
      }
    }
    for (int i = 0; i < p_.nx; ++i) {
      if (p_.xf_mask(i) == 0.0) continue;
      const double e = r.x[p_.N](i) - p_.xf(i);
      lx[p_.N](i) += mul_.terminal(i) + mul_.rho * e;
    }

    gT = 1.0;
    VectorXd mu = lx[p_.N];
    for (int k = p_.N - 1; k >= 0; --k) {
      const MatrixXd a =
          MatrixXd::Identity(p_.nx, p_.nx) - 0.5 * h * fx[k + 1];
      const VectorXd m = a.transpose().partialPivLu().solve(mu);
      gu[k + 1] += 0.5 * h * fu[k + 1].transpose() * m;
      gu[k] += 0.5 * h * fu[k].transpose() * m;
      gT += m.dot(0.5 * (r.f[k] + r.f[k + 1])) / p_.N;
      mu = lx[k] + (MatrixXd::Identity(p_.nx, p_.nx) + 0.5 * h * fx[k]).transpose() * m;
    }
  }

 private:
  const OcpProblem& p_;
  const Multipliers& mul_;
};

struct Point {
  std::vector<VectorXd> u;
  double T = 0.0;
};

}  // namespace

Trajectory solve_ocp(const OcpProblem& p, const SolveOptions& opt, const OcpGuess* guess) {
  Multipliers mul;
  mul.path = MatrixXd::Zero(std::max(p.nc, 1), p.N + 1);
  mul.terminal = VectorXd::Zero(p.nx);
  mul.rho = opt.rho0;

  Point z;
  z.u.assign(p.N + 1, VectorXd::Zero(p.nu));
  z.T = std::clamp(1.0, p.t_lo, p.t_hi);
  if (guess != nullptr) {
    z.T = std::clamp(guess->t_f, p.t_lo, p.t_hi);
    for (int k = 0; k <= p.N; ++k) {
      // Resample the guess inputs onto our grid.
      const double s = guess->u.empty()
                           ? 0.0
                           : static_cast<double>(k) * (guess->u.size() - 1) / p.N;
      if (!guess->u.empty()) {
        const int i = std::min(static_cast<int>(s), static_cast<int>(guess->u.size()) - 1);
        z.u[k] = guess->u[i];
      }
    }
  }
  auto project = [&](Point& q) {
    q.T = std::clamp(q.T, p.t_lo, p.t_hi);
    for (auto& uu : q.u)
      uu = uu.cwiseMax(p.u_lo).cwiseMin(p.u_hi);
  };
  project(z);

  int total_inner = 0;
  int outers_done = 0;
  bool inner_converged = false;
  double prev_violation = std::numeric_limits<double>::infinity();
  Rollout best;

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    Transcription tr(p, mul);
    Rollout roll = tr.rollout(z.u, z.T);
    std::vector<VectorXd> g;
    double gT = 0.0;
    tr.gradient(z.u, z.T, roll, g, gT);

    std::deque<double> recent{roll.L};
    double alpha = 1.0;
    inner_converged = false;

    for (int it = 0; it < opt.max_inner; ++it, ++total_inner) {
      // Projected-gradient direction d = P(z - alpha*g) - z.
      Point trial = z;
      trial.T -= alpha * gT;
      for (int k = 0; k <= p.N; ++k) trial.u[k] -= alpha * g[k];
      project(trial);
      const double dT = trial.T - z.T;
      std::vector<VectorXd> du(p.N + 1);
      double dnorm = std::abs(dT);
      double slope = gT * dT;
      for (int k = 0; k <= p.N; ++k) {
        du[k] = trial.u[k] - z.u[k];
        dnorm = std::max(dnorm, du[k].lpNorm<Eigen::Infinity>());
        slope += g[k].dot(du[k]);
      }
      if (dnorm < opt.grad_tol) {
        inner_converged = true;
        break;
      }

      // Nonmonotone Armijo backtracking along d.
      const double l_ref = *std::max_element(recent.begin(), recent.end());
      double step = 1.0;
      Rollout cand;
      bool accepted = false;
      Point q;
      for (int ls = 0; ls < 25; ++ls) {
        q = z;
        q.T += step * dT;
        for (int k = 0; k <= p.N; ++k) q.u[k] += step * du[k];
        cand = tr.rollout(q.u, q.T);
        if (cand.L <= l_ref + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;

      std::vector<VectorXd> g_new;
      double gT_new = 0.0;
      tr.gradient(q.u, q.T, cand, g_new, gT_new);

      // Barzilai-Borwein step length from s = q - z, y = g_new - g.
      double sts = std::pow(step * dT, 2);
      double sty = step * dT * (gT_new - gT);
      for (int k = 0; k <= p.N; ++k) {
        sts += step * step * du[k].squaredNorm();
        sty += step * du[k].dot(g_new[k] - g[k]);
      }
      alpha = sty > 1e-14 ? std::clamp(sts / sty, 1e-6, 1e6) : std::min(alpha * 2.0, 1e6);

      z = q;
      roll = cand;
      g = std::move(g_new);
      gT = gT_new;
      recent.push_back(roll.L);
      if (recent.size() > 8) recent.pop_front();
    }

    best = tr.rollout(z.u, z.T);
    ++outers_done;
    double violation = 0.0;
    if (p.nc > 0)
      for (int k = 0; k <= p.N; ++k)
        violation = std::max(violation, best.c[k].maxCoeff());
    violation = std::max(violation, 0.0);
    for (int i = 0; i < p.nx; ++i)
      if (p.xf_mask(i) != 0.0)
        violation = std::max(violation, std::abs(best.x[p.N](i) - p.xf(i)));

    if (violation <= opt.constraint_tol && inner_converged) break;
    if (outer + 1 == opt.max_outer) break;

    if (p.nc > 0)
      for (int k = 0; k <= p.N; ++k)
        for (int j = 0; j < p.nc; ++j)
          mul.path(j, k) = std::max(0.0, mul.path(j, k) + mul.rho * best.c[k](j));
    for (int i = 0; i < p.nx; ++i)
      if (p.xf_mask(i) != 0.0)
        mul.terminal(i) += mul.rho * (best.x[p.N](i) - p.xf(i));
    if (violation > 0.25 * prev_violation)
      mul.rho = std::min(mul.rho * opt.rho_growth, opt.rho_max);
    prev_violation = violation;
  }

  Trajectory out;
  out.t_f = z.T;
  out.t.resize(p.N + 1);
  for (int k = 0; k <= p.N; ++k) out.t[k] = z.T * k / p.N;
  out.x = best.x;
  out.u = z.u;
  out.inner_iters = total_inner;
  out.outer_iters = outers_done;

  double violation = 0.0;
  if (p.nc > 0)
    for (int k = 0; k <= p.N; ++k)
      violation = std::max(violation, best.c[k].maxCoeff());
  violation = std::max(violation, 0.0);
  for (int i = 0; i < p.nx; ++i)
    if (p.xf_mask(i) != 0.0)
      violation = std::max(violation, std::abs(best.x[p.N](i) - p.xf(i)));
  out.max_violation = violation;
  if (violation <= opt.constraint_tol)
    out.status = inner_converged ? TrajStatus::Optimal : TrajStatus::Feasible;
  else if (violation <= opt.accept_tol)
    out.status = TrajStatus::Feasible;
  else
    out.status = TrajStatus::Failed;
  return out;
}

double trapezoidal_defect(const OcpProblem& p, const Trajectory& traj) {
  double worst = 0.0;
  for (size_t k = 0; k + 1 < traj.x.size(); ++k) {
    const double h = traj.t[k + 1] - traj.t[k];
    const Eigen::VectorXd fk = p.dynamics(traj.x[k], traj.u[k]);
    const Eigen::VectorXd fk1 = p.dynamics(traj.x[k + 1], traj.u[k + 1]);
    worst = std::max(worst,
                     (traj.x[k + 1] - traj.x[k] - 0.5 * h * (fk + fk1)).norm());
  }
  return worst;
}

}  // namespace tmm
