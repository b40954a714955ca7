// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include "apriori/reparam.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace apriori {

Vector cumulative_tau(const ProblemSpec& p, const ControlSolution& sol, double beta) {
  const int N = sol.intervals();
  if (N < 1 || sol.u.cols() != N + 1 || sol.x.cols() != N + 1) {
    throw Error(ErrorKind::Reparam, "reparameterization needs a solution with matching grids");
  }
  Vector rate(N + 1);
  for (int i = 0; i <= N; ++i) {
    rate[i] = lagrangian(p, sol.grid[i], sol.x.col(i), sol.u.col(i)) + beta;
    if (!(rate[i] > 0.0)) {
      throw Error(ErrorKind::Reparam,
                  fmt::format("reparameterization failed: L+beta not positive at node {}", i));
    }
  }
  Vector tau(N + 1);
  tau[0] = 0.0;
  for (int i = 0; i < N; ++i) {
    tau[i + 1] = tau[i] + 0.5 * (sol.grid[i + 1] - sol.grid[i]) * (rate[i] + rate[i + 1]);
    if (!(tau[i + 1] > tau[i])) {
      throw Error(ErrorKind::Reparam,
                  fmt::format("reparameterization failed: L+beta not positive (tau stalls at node {})",
                              i + 1));
    }
  }
  return tau;
}

TimeOptimalTrajectory to_time_optimal(const ProblemSpec& p, const ControlSolution& sol, double beta,
                                      int tau_intervals) {
  if (beta < 0.0) throw Error(ErrorKind::Reparam, "beta must be nonnegative");
  const Vector tau_nodes = cumulative_tau(p, sol, beta);
  const int N = sol.intervals();
  const int M = tau_intervals > 0 ? tau_intervals : N;

  TimeOptimalTrajectory traj;
  traj.beta = beta;
  traj.T = tau_nodes[N];
  traj.tau.resize(M + 1);
  traj.t.resize(M + 1);
  traj.y.resize(p.dim_x, M + 1);
  traj.w.resize(p.dim_u, M + 1);

  int i = 0;
  for (int k = 0; k <= M; ++k) {
    const double tk = k == M ? traj.T : traj.T * static_cast<double>(k) / M;
    traj.tau[k] = tk;
    while (i < N - 1 && tau_nodes[i + 1] < tk) ++i;
    const double s = std::clamp((tk - tau_nodes[i]) / (tau_nodes[i + 1] - tau_nodes[i]), 0.0, 1.0);
    traj.t[k] = (1.0 - s) * sol.grid[i] + s * sol.grid[i + 1];
    traj.y.col(k) = (1.0 - s) * sol.x.col(i) + s * sol.x.col(i + 1);
    traj.w.col(k) = (1.0 - s) * sol.u.col(i) + s * sol.u.col(i + 1);
  }
  traj.t[0] = sol.grid[0];
  traj.t[M] = sol.grid[N];
  return traj;
}

RecoveredProcess from_time_optimal(const ProblemSpec& p, const TimeOptimalTrajectory& traj,
                                   int intervals) {
  const int M = traj.intervals();
  if (M < 1) throw Error(ErrorKind::Reparam, "time-optimal trajectory needs at least two nodes");
  if (traj.y.rows() != p.dim_x || traj.w.rows() != p.dim_u) {
    throw Error(ErrorKind::Dimension, "time-optimal trajectory does not match the problem dimensions");
  }
  for (int k = 0; k < M; ++k) {
    const double rate = (traj.t[k + 1] - traj.t[k]) / (traj.tau[k + 1] - traj.tau[k]);
    if (!(rate > 1e-12)) {
      throw Error(ErrorKind::Reparam,
                  fmt::format("degenerate arc; inverse transform refused (dt/dtau = {} on cell {})",
                              rate, k));
    }
  }

  RecoveredProcess out;
  out.grid = uniform_grid(intervals);
  out.u.resize(p.dim_u, intervals + 1);
  out.x.resize(p.dim_x, intervals + 1);
  const double t_lo = traj.t[0];
  const double t_hi = traj.t[M];
  int k = 0;
  for (int j = 0; j <= intervals; ++j) {
    const double tj = t_lo + (t_hi - t_lo) * out.grid[j];
    while (k < M - 1 && traj.t[k + 1] < tj) ++k;
    const double s = std::clamp((tj - traj.t[k]) / (traj.t[k + 1] - traj.t[k]), 0.0, 1.0);
    out.x.col(j) = (1.0 - s) * traj.y.col(k) + s * traj.y.col(k + 1);
    out.u.col(j) = (1.0 - s) * traj.w.col(k) + s * traj.w.col(k + 1);
  }
  return out;
}

double dynamics_residual(const ProblemSpec& p, const RecoveredProcess& proc) {
  double worst = 0.0;
  const int N = static_cast<int>(proc.u.cols()) - 1;
  const double h = 1.0 / N;
  for (int i = 0; i < N; ++i) {
    const Vector xi = proc.x.col(i);
    const double t0 = i * h;
    const Vector um = 0.5 * (proc.u.col(i) + proc.u.col(i + 1));
    const Vector k1 = control_matrix(p, t0, xi) * proc.u.col(i);
    const Vector k2 = control_matrix(p, t0 + 0.5 * h, xi + 0.5 * h * k1) * um;
    const Vector k3 = control_matrix(p, t0 + 0.5 * h, xi + 0.5 * h * k2) * um;
    const Vector k4 = control_matrix(p, t0 + h, xi + h * k3) * proc.u.col(i + 1);
    const Vector next = xi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    worst = std::max(worst, (next - proc.x.col(i + 1)).norm());
  }
  return worst;
}

}  // namespace apriori
