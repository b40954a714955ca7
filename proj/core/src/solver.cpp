// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include "apriori/solver.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace apriori {

Vector uniform_grid(int intervals) {
  if (intervals < 1) throw Error(ErrorKind::Solver, "grid needs at least one interval");
  Vector t(intervals + 1);
  for (int i = 0; i <= intervals; ++i) t[i] = static_cast<double>(i) / intervals;
  return t;
}

Vector trapezoid_weights(int intervals) {
  const double h = 1.0 / intervals;
  Vector w = Vector::Constant(intervals + 1, h);
  w[0] = w[intervals] = 0.5 * h;
  return w;
}

namespace {

void check_control(const ProblemSpec& p, const Matrix& u) {
  if (u.rows() != p.dim_u || u.cols() < 2) {
    throw Error(ErrorKind::Dimension,
                fmt::format("control grid must be {} x (N+1) with N >= 1, got {} x {}", p.dim_u,
                            u.rows(), u.cols()));
  }
}

// (d/dx [g(t,x) u])^T v, component k = v^T (dg/dx_k) u.
Vector velocity_jacobian_transpose(const ProblemSpec& p, double t, const Vector& x,
                                   const Vector& u, const Vector& v) {
  const ControlMatrixGradient dg = p.control_matrix_gradient(t, x);
  Vector out(p.dim_x);
  for (int k = 0; k < p.dim_x; ++k) out[k] = v.dot(dg.dx[k] * u);
  return out;
}

struct Stages {
  Matrix g1, g2, g3, g4;
  Vector x2, x3, x4;
  Vector k1, k2, k3, k4;
};

Stages rk4_stages(const ProblemSpec& p, double t0, double h, const Vector& x0, const Vector& ua,
                  const Vector& ub) {
  Stages s;
  const Vector um = 0.5 * (ua + ub);
  const double tm = t0 + 0.5 * h;
  s.g1 = control_matrix(p, t0, x0);
  s.k1 = s.g1 * ua;
  s.x2 = x0 + 0.5 * h * s.k1;
  s.g2 = control_matrix(p, tm, s.x2);
  s.k2 = s.g2 * um;
  s.x3 = x0 + 0.5 * h * s.k2;
  s.g3 = control_matrix(p, tm, s.x3);
  s.k3 = s.g3 * um;
  s.x4 = x0 + h * s.k3;
  s.g4 = control_matrix(p, t0 + h, s.x4);
  s.k4 = s.g4 * ub;
  return s;
}

}  // namespace

Matrix integrate_state(const ProblemSpec& p, const Matrix& u) {
  check_control(p, u);
  const int N = static_cast<int>(u.cols()) - 1;
  const double h = 1.0 / N;
  Matrix x = Matrix::Zero(p.dim_x, N + 1);
  for (int i = 0; i < N; ++i) {
    Stages s;
    try {
      s = rk4_stages(p, i * h, h, x.col(i), u.col(i), u.col(i + 1));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Evaluation) throw;
      throw Error(ErrorKind::Solver, fmt::format("dynamics blow-up at step {}: {}", i, e.what()));
    }
    x.col(i + 1) = x.col(i) + h / 6.0 * (s.k1 + 2.0 * s.k2 + 2.0 * s.k3 + s.k4);
    if (!x.col(i + 1).allFinite()) {
      throw Error(ErrorKind::Solver, fmt::format("dynamics blow-up at step {}", i));
    }
  }
  return x;
}

double trapezoid_cost(const ProblemSpec& p, const Matrix& u, const Matrix& x) {
  const int N = static_cast<int>(u.cols()) - 1;
  const Vector w = trapezoid_weights(N);
  double j = 0.0;
  for (int i = 0; i <= N; ++i) j += w[i] * lagrangian(p, static_cast<double>(i) / N, x.col(i), u.col(i));
  return j;
}

CostGradient cost_and_gradient(const ProblemSpec& p, const Matrix& u) {
  const Matrix x = integrate_state(p, u);
  const int N = static_cast<int>(u.cols()) - 1;
  const double h = 1.0 / N;

  CostGradient out;
  out.weights = trapezoid_weights(N);
  out.dcost = Matrix::Zero(p.dim_u, N + 1);
  out.cost = trapezoid_cost(p, u, x);

  // Terminal node: lambda_N collects only the running-cost term.
  Evaluation e = evaluate(p, 1.0, x.col(N), u.col(N));
  out.dcost.col(N) += out.weights[N] * e.lagrangian_gradient.du;
  Vector lam = out.weights[N] * e.lagrangian_gradient.dx;

  for (int i = N - 1; i >= 0; --i) {
    const double t0 = i * h;
    const double tm = t0 + 0.5 * h;
    const double t1 = t0 + h;
    const Vector ua = u.col(i);
    const Vector ub = u.col(i + 1);
    const Vector um = 0.5 * (ua + ub);
    const Vector x0 = x.col(i);
    const Stages s = rk4_stages(p, t0, h, x0, ua, ub);

    Vector kb1 = h / 6.0 * lam;
    Vector kb2 = h / 3.0 * lam;
    Vector kb3 = h / 3.0 * lam;
    const Vector kb4 = h / 6.0 * lam;
    Vector xb = lam;
    Vector ua_bar = Vector::Zero(p.dim_u);
    Vector ub_bar = Vector::Zero(p.dim_u);
    Vector um_bar = Vector::Zero(p.dim_u);

    const Vector x4b = velocity_jacobian_transpose(p, t1, s.x4, ub, kb4);
    ub_bar += s.g4.transpose() * kb4;
    kb3 += h * x4b;
    xb += x4b;

    const Vector x3b = velocity_jacobian_transpose(p, tm, s.x3, um, kb3);
    um_bar += s.g3.transpose() * kb3;
    kb2 += 0.5 * h * x3b;
    xb += x3b;

    const Vector x2b = velocity_jacobian_transpose(p, tm, s.x2, um, kb2);
    um_bar += s.g2.transpose() * kb2;
    kb1 += 0.5 * h * x2b;
    xb += x2b;

    xb += velocity_jacobian_transpose(p, t0, x0, ua, kb1);
    ua_bar += s.g1.transpose() * kb1;

    out.dcost.col(i) += ua_bar + 0.5 * um_bar;
    out.dcost.col(i + 1) += ub_bar + 0.5 * um_bar;

    e = evaluate(p, t0, x0, ua);
    out.dcost.col(i) += out.weights[i] * e.lagrangian_gradient.du;
    lam = xb + out.weights[i] * e.lagrangian_gradient.dx;
    if (!lam.allFinite()) {
      throw Error(ErrorKind::Solver, fmt::format("adjoint blow-up at step {}", i));
    }
  }

  out.grad = out.dcost;
  for (int i = 0; i <= N; ++i) out.grad.col(i) /= out.weights[i];
  return out;
}

ControlSolution solve(const ProblemSpec& p, const SolverOptions& opts) {
  const int N = opts.intervals;
  ControlSolution sol;
  sol.grid = uniform_grid(N);
  Matrix u = Matrix::Zero(p.dim_u, N + 1);
  CostGradient cg = cost_and_gradient(p, u);
  sol.cost_history.push_back(cg.cost);

  const auto weighted_sq = [&](const Matrix& g) {
    double s = 0.0;
    for (int i = 0; i <= N; ++i) s += cg.weights[i] * g.col(i).squaredNorm();
    return s;
  };

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    const double gnorm = cg.grad.cwiseAbs().maxCoeff();
    if (gnorm <= opts.tol) {
      sol.converged = true;
      break;
    }
    const double slope = weighted_sq(cg.grad);
    // Below this the cost difference is not resolvable in double precision.
    const double resolution = 1e-14 * (1.0 + std::abs(cg.cost));

    double alpha = 1.0;
    bool accepted = false;
    Matrix trial;
    for (int bt = 0; bt < opts.max_backtracks; ++bt, alpha *= 0.5) {
      trial = u - alpha * cg.grad;
      const double jt = trapezoid_cost(p, trial, integrate_state(p, trial));
      const double predicted = opts.armijo * alpha * slope;
      if (jt <= cg.cost - predicted || (predicted < resolution && jt <= cg.cost + resolution)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    u = std::move(trial);
    cg = cost_and_gradient(p, u);
    sol.cost_history.push_back(cg.cost);
  }

  sol.iterations = iter;
  sol.u = u;
  sol.x = integrate_state(p, u);
  sol.cost = cg.cost;
  sol.grad_norm_final = cg.grad.cwiseAbs().maxCoeff();
  sol.converged = sol.grad_norm_final <= opts.tol;
  return sol;
}

double l1_norm(const ControlSolution& sol) {
  const Vector w = trapezoid_weights(sol.intervals());
  double s = 0.0;
  for (int i = 0; i < sol.u.cols(); ++i) s += w[i] * sol.u.col(i).norm();
  return s;
}

double max_control_norm(const Matrix& u) {
  double m = 0.0;
  for (int i = 0; i < u.cols(); ++i) m = std::max(m, u.col(i).norm());
  return m;
}

}  // namespace apriori
