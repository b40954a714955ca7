// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "apriori/types.hpp"

namespace apriori {

/// Which explicit bound applies: autonomous data, g = g(t), or neither.
enum class Structure { Autonomous, TimeVaryingGOnly, General };

const char* to_string(Structure s);

/// Partials of the running cost L(t, x, u).
struct LagrangianGradient {
  double dt = 0.0;
  Vector dx;
  Vector du;
};

/// Partials of the n x m control matrix g(t, x); dx[k] holds dg/dx_k.
struct ControlMatrixGradient {
  Matrix dt;
  std::vector<Matrix> dx;
};

using LagrangianFn = std::function<double(double, const Vector&, const Vector&)>;
using LagrangianGradientFn =
    std::function<LagrangianGradient(double, const Vector&, const Vector&)>;
using ControlMatrixFn = std::function<Matrix(double, const Vector&)>;
using ControlMatrixGradientFn =
    std::function<ControlMatrixGradient(double, const Vector&)>;
using GrowthFn = std::function<double(double)>;

/// Problem datum for
///
///   minimize  int_0^1 L(t, x, u) dt,   x' = g(t, x) u,   x(0) = 0,
///
/// together with the declared constants of the growth/convexity conditions.
/// Callbacks must be pure; a ProblemSpec is never mutated after construction.
struct ProblemSpec {
  std::string name;
  int dim_x = 1;
  int dim_u = 1;

  LagrangianFn lagrangian;
  LagrangianGradientFn lagrangian_gradient;
  ControlMatrixFn control_matrix;
  ControlMatrixGradientFn control_matrix_gradient;
  /// Lower envelope theta(|u|) <= L, superlinear at infinity.
  GrowthFn growth;

  double mu = 1.0;        // strong convexity modulus in u
  double xi = 1.0;        // growth constants
  double delta = 0.1;
  double c_g = 1.0;       // |g| <= c_g
  double c_grad_g = 0.0;  // |grad_(t,x) g| <= c_grad_g
  Structure structure = Structure::General;

  /// Resolved builtin parameters (defaults merged with overrides).
  std::map<std::string, double> parameters;
};

struct Evaluation {
  double cost_density = 0.0;
  Vector velocity;
  LagrangianGradient lagrangian_gradient;
  ControlMatrixGradient control_matrix_gradient;
};

/// Evaluates L, g u and all partials at one point. Throws Error(Dimension) on
/// inconsistent sizes and Error(Evaluation) when any callback returns a
/// non-finite value.
Evaluation evaluate(const ProblemSpec& p, double t, const Vector& x, const Vector& u);

/// Cheaper checked accessors used on hot paths.
double lagrangian(const ProblemSpec& p, double t, const Vector& x, const Vector& u);
Matrix control_matrix(const ProblemSpec& p, double t, const Vector& x);

using ParameterMap = std::map<std::string, double>;

std::vector<std::string> builtin_names();

/// Registered example problems: "toy-quadratic", "lq-tracking", "sin-well",
/// "lq-tv". Unknown names and unknown override keys raise Error(Registry).
ProblemSpec builtin(std::string_view name, const ParameterMap& overrides = {});

/// Operator 2-norm by power iteration on A^T A.
double operator_norm(const Matrix& a);

/// Norm of the (1+n)-slab tensor grad_(t,x) g, taken as the root-sum-square
/// of the operator norms of the partials (an upper bound of the induced norm).
double gradient_norm(const ControlMatrixGradient& dg);

}  // namespace apriori
