// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <chrono>
#include <numbers>
#include <random>

#include "apriori/solver.hpp"
#include "helpers.hpp"

namespace apriori {
namespace {

std::vector<ProblemSpec> all_problems() {
  std::vector<ProblemSpec> ps;
  for (const auto& n : builtin_names()) ps.push_back(builtin(n));
  ps.push_back(testing::planar());
  return ps;
}

TEST(Solver, GridAndWeights) {
  const Vector g = uniform_grid(4);
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[4], 1.0);
  const Vector w = trapezoid_weights(4);
  EXPECT_DOUBLE_EQ(w.sum(), 1.0);
  EXPECT_DOUBLE_EQ(w[0], 0.125);
  EXPECT_DOUBLE_EQ(w[2], 0.25);
  EXPECT_THROW(uniform_grid(0), Error);
}

TEST(Solver, StateIntegrationIsFourthOrderAccurate) {
  const auto p = builtin("lq-tv");
  const double pi = std::numbers::pi;
  // u = 1: x(t) = t + (1 - cos 2 pi t) / (4 pi)
  const auto err = [&](int N) {
    const Matrix x = integrate_state(p, Matrix::Ones(1, N + 1));
    double e = 0.0;
    for (int i = 0; i <= N; ++i) {
      const double t = static_cast<double>(i) / N;
      e = std::max(e, std::abs(x(0, i) - (t + (1.0 - std::cos(2.0 * pi * t)) / (4.0 * pi))));
    }
    return e;
  };
  const double e1 = err(20), e2 = err(40);
  EXPECT_LT(e1, 1e-6);
  EXPECT_NEAR(std::log2(e1 / e2), 4.0, 0.3);
  EXPECT_DOUBLE_EQ(integrate_state(p, Matrix::Ones(1, 11))(0, 0), 0.0);
}

TEST(Solver, CostOfKnownControl) {
  // toy: L = 1 + u^2/2 with u = t  =>  J = 1 + 1/6
  const auto p = builtin("toy-quadratic");
  const int N = 1000;
  Matrix u(1, N + 1);
  for (int i = 0; i <= N; ++i) u(0, i) = static_cast<double>(i) / N;
  const CostGradient cg = cost_and_gradient(p, u);
  EXPECT_NEAR(cg.cost, 1.0 + 1.0 / 6.0, 1e-6);
  EXPECT_DOUBLE_EQ(cg.cost, trapezoid_cost(p, u, integrate_state(p, u)));
}

// Discrete adjoint against central differences, 20 random control grids per problem.
TEST(Solver, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2024);
  const int N = 24;
  const double h = 1e-6;
  for (const auto& p : all_problems()) {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix u = testing::random_controls(rng, p.dim_u, N, 1.5);
      const CostGradient cg = cost_and_gradient(p, u);
      Matrix fd(u.rows(), u.cols());
      for (int j = 0; j < u.cols(); ++j) {
        for (int i = 0; i < u.rows(); ++i) {
          Matrix up = u, um = u;
          up(i, j) += h;
          um(i, j) -= h;
          fd(i, j) = (trapezoid_cost(p, up, integrate_state(p, up)) -
                      trapezoid_cost(p, um, integrate_state(p, um))) /
                     (2 * h);
        }
      }
      worst = std::max(worst, (cg.dcost - fd).norm() / fd.norm());
      // density = raw / weight
      for (int j = 0; j < u.cols(); ++j) {
        EXPECT_NEAR(cg.grad(0, j) * cg.weights[j], cg.dcost(0, j), 1e-14 * (1 + std::abs(cg.dcost(0, j))));
      }
    }
    EXPECT_LE(worst, 1e-5) << p.name;
  }
}

TEST(Solver, ZeroControlGradients) {
  const CostGradient toy = cost_and_gradient(builtin("toy-quadratic"), Matrix::Zero(1, 101));
  EXPECT_DOUBLE_EQ(toy.cost, 1.0);
  EXPECT_EQ(toy.grad.cwiseAbs().maxCoeff(), 0.0);
  // lq-tracking: grad(t) = -(1 - t)
  const int N = 1000;
  const CostGradient lq = cost_and_gradient(builtin("lq-tracking"), Matrix::Zero(1, N + 1));
  EXPECT_NEAR(lq.cost, 0.6, 1e-12);
  for (int i = 0; i <= N; i += 50) {
    EXPECT_NEAR(lq.grad(0, i), -(1.0 - static_cast<double>(i) / N), 1e-3);
  }
}

TEST(Solver, UnitControlEndpoints) {
  EXPECT_NEAR(integrate_state(builtin("toy-quadratic"), Matrix::Ones(1, 1001))(0, 1000), 1.0, 1e-10);
  EXPECT_NEAR(integrate_state(builtin("lq-tv"), Matrix::Ones(1, 1001))(0, 1000), 1.0, 1e-8);
}

TEST(Solver, CostConvergesInN) {
  SolverOptions a, b;
  a.intervals = 500;
  b.intervals = 1000;
  const auto p = builtin("lq-tracking");
  EXPECT_LE(std::abs(solve(p, a).cost - solve(p, b).cost), 1e-5);
}

TEST(Solver, LqTrackingClosedForm) {
  const auto start = std::chrono::steady_clock::now();
  const ControlSolution sol = solve(builtin("lq-tracking"));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_TRUE(sol.converged);
  EXPECT_NEAR(sol.u(0, 0), testing::oracle::lq_u0, 1e-3);
  EXPECT_NEAR(sol.cost, testing::oracle::lq_cost, 1e-4);
  // u = tanh(1-t)/..: closed form u(t) = sinh(1-t)/cosh(1)
  for (int i = 0; i <= 1000; i += 100) {
    const double t = sol.grid[i];
    EXPECT_NEAR(sol.u(0, i), std::sinh(1.0 - t) / std::cosh(1.0), 1e-3);
  }
  EXPECT_LT(secs, 10.0);
}

TEST(Solver, ToyQuadraticIsAlreadyOptimal) {
  const ControlSolution sol = solve(builtin("toy-quadratic"));
  EXPECT_TRUE(sol.converged);
  EXPECT_EQ(sol.iterations, 0);
  EXPECT_DOUBLE_EQ(max_control_norm(sol.u), 0.0);
  EXPECT_NEAR(sol.cost, 1.0, 1e-14);
}

TEST(Solver, CostHistoryDescends) {
  for (const auto& p : all_problems()) {
    SolverOptions opts;
    opts.intervals = 200;
    const ControlSolution sol = solve(p, opts);
    EXPECT_TRUE(sol.converged) << p.name;
    ASSERT_FALSE(sol.cost_history.empty());
    for (std::size_t k = 1; k < sol.cost_history.size(); ++k) {
      const double prev = sol.cost_history[k - 1];
      EXPECT_LE(sol.cost_history[k], prev + 1e-14 * (1 + std::abs(prev))) << p.name;
    }
    EXPECT_LE(sol.grad_norm_final, opts.tol) << p.name;
  }
}

TEST(Solver, IterationCapReportsNotConverged) {
  SolverOptions opts;
  opts.intervals = 100;
  opts.max_iter = 1;
  const ControlSolution sol = solve(builtin("lq-tv"), opts);
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.iterations, 1);
}

TEST(Solver, Norms) {
  ControlSolution sol;
  sol.grid = uniform_grid(2);
  sol.u = Matrix(1, 3);
  sol.u << 1.0, -3.0, 1.0;
  EXPECT_DOUBLE_EQ(max_control_norm(sol.u), 3.0);
  EXPECT_DOUBLE_EQ(l1_norm(sol), 0.25 * 1 + 0.5 * 3 + 0.25 * 1);
}

TEST(Solver, BlowUpNamesTheStep) {
  auto p = builtin("toy-quadratic");
  p.control_matrix = [](double, const Vector& x) { return Matrix::Constant(1, 1, 1.0 + x[0] * x[0]); };
  // x' = (1 + x^2) 1000 escapes to infinity within a few steps
  try {
    integrate_state(p, Matrix::Constant(1, 101, 1000.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Solver);
    EXPECT_NE(std::string(e.what()).find("blow-up at step"), std::string::npos);
  }
}

TEST(Solver, ShapeMismatchIsDimensionError) {
  try {
    integrate_state(builtin("toy-quadratic"), Matrix::Zero(2, 11));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
  }
}

}  // namespace
}  // namespace apriori
