// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "apriori/problem.hpp"
#include "apriori/solver.hpp"

namespace apriori {

/// Trajectory of the time-optimal system
///
///   d(t, y)/dtau = (1, g(t, y) w) / (L(t, y, w) + beta),  t(T) = 1,
///
/// sampled on a uniform tau grid. beta = 0 is the unshifted form.
struct TimeOptimalTrajectory {
  Vector tau;
  Vector t;
  Matrix y;
  Matrix w;
  double T = 0.0;
  double beta = 0.0;

  int intervals() const { return static_cast<int>(tau.size()) - 1; }
};

/// tau(t_i) = int_0^{t_i} (L + beta) dt by cumulative trapezoid at the solver
/// nodes. Throws Error(Reparam) unless strictly increasing.
Vector cumulative_tau(const ProblemSpec& p, const ControlSolution& sol, double beta);

/// Reparameterizes a Lagrange solution by tau(t) = int (L + beta) and resamples
/// it on tau_intervals + 1 uniform tau nodes (0 means the solver's N) by
/// monotone linear interpolation.
TimeOptimalTrajectory to_time_optimal(const ProblemSpec& p, const ControlSolution& sol,
                                      double beta, int tau_intervals = 0);

struct RecoveredProcess {
  Vector grid;
  Matrix u;
  Matrix x;
};

/// Inverse transform onto a uniform t grid with the given number of intervals.
/// Throws Error(Reparam) if dt/dtau <= 1e-12 on any tau cell.
RecoveredProcess from_time_optimal(const ProblemSpec& p, const TimeOptimalTrajectory& traj,
                                   int intervals);

/// max_i |x_{i+1} - RK4(x_i; u_i, u_{i+1})|: how well the recovered pair
/// satisfies x' = g u on its grid.
double dynamics_residual(const ProblemSpec& p, const RecoveredProcess& proc);

}  // namespace apriori
