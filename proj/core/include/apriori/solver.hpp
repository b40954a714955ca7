// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "apriori/problem.hpp"

namespace apriori {

struct SolverOptions {
  int intervals = 1000;
  double tol = 1e-8;
  int max_iter = 10000;
  double armijo = 1e-4;
  int max_backtracks = 60;
};

/// Direct single-shooting solution on a uniform grid. Columns of u and x are
/// grid nodes; the control is piecewise linear between nodes.
struct ControlSolution {
  Vector grid;
  Matrix u;
  Matrix x;
  double cost = 0.0;
  double grad_norm_final = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Cost of every accepted iterate, starting with the initial guess.
  std::vector<double> cost_history;

  int intervals() const { return static_cast<int>(grid.size()) - 1; }
};

Vector uniform_grid(int intervals);

/// Trapezoid weights h/2, h, ..., h, h/2 on the uniform grid.
Vector trapezoid_weights(int intervals);

/// Classical RK4 for x' = g(t, x) u with x(0) = 0; the control at half steps
/// is the mean of the neighbouring nodes. Throws Error(Solver) on blow-up.
Matrix integrate_state(const ProblemSpec& p, const Matrix& u);

/// Trapezoid quadrature of L along (grid, x, u).
double trapezoid_cost(const ProblemSpec& p, const Matrix& u, const Matrix& x);

struct CostGradient {
  double cost = 0.0;
  /// Gradient density: dJ/du_i divided by the trapezoid weight of node i, so
  /// it approximates grad_u L + g^T lambda at the node.
  Matrix grad;
  /// Raw partial derivatives dJ/du_i of the discrete cost.
  Matrix dcost;
  Vector weights;
};

/// Exact gradient of the discrete cost through a reverse sweep of the RK4
/// scheme (the discrete adjoint of lambda' = -grad_x L - (grad_x(g u))^T lambda,
/// lambda(1) = 0).
CostGradient cost_and_gradient(const ProblemSpec& p, const Matrix& u);

/// Gradient descent with Armijo backtracking from u = 0.
ControlSolution solve(const ProblemSpec& p, const SolverOptions& opts = {});

/// Trapezoid approximation of int_0^1 |u(t)| dt.
double l1_norm(const ControlSolution& sol);

/// Largest nodal |u|.
double max_control_norm(const Matrix& u);

}  // namespace apriori
