// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <random>

#include "apriori/problem.hpp"

namespace apriori::testing {

// Frozen values from tests/oracles/compute_oracles.py (scipy, independent code path).
namespace oracle {
inline constexpr double lq_r0 = 1.894427191;
inline constexpr double lq_c = 2.494427191;
inline constexpr double lq_lambda0 = 6.2055106966;
inline constexpr double lq_beta = 6.129477294766;
inline constexpr double lq_ell = 4.966887957537;
inline constexpr double lqtv_R = 3.7416407865;
inline constexpr double lqtv_lambda0 = 11.3415786741;
inline constexpr double lqtv_eta = 0.283308235052;
inline constexpr double lqtv_gamma = 5.754852114e6;
inline constexpr double lqtv_ell = 2.005426160e4;
inline constexpr double sin_c = 2.000001;
inline constexpr double sin_lambda0 = 3.0;
inline constexpr double sin_beta = 3.591371288635;
inline constexpr double sin_ell = 3.630804673519;
inline constexpr double toy_beta_half = 7.000008;
inline constexpr double toy_ell_half = 4.000002;
inline constexpr double toy_beta = 1.040610141823;
inline constexpr double toy_ell = 2.02020303;
inline constexpr double lq_u0 = 0.761594155956;  // tanh(1)
inline constexpr double lq_cost = 0.480797077978;
}  // namespace oracle

/// n = m = 2: L = a + |u|^2/2 + |x - e1|^2/2, g = rotation by t/2 scaled by (1 + x1^2/(1+x1^2))/2.
inline ProblemSpec planar() {
  ProblemSpec p;
  p.name = "planar";
  p.dim_x = 2;
  p.dim_u = 2;
  p.lagrangian = [](double, const Vector& x, const Vector& u) {
    Vector e = x;
    e[0] -= 1.0;
    return 0.5 + 0.5 * u.squaredNorm() + 0.5 * e.squaredNorm();
  };
  p.lagrangian_gradient = [](double, const Vector& x, const Vector& u) {
    Vector e = x;
    e[0] -= 1.0;
    return LagrangianGradient{0.0, e, u};
  };
  const auto scale = [](double x1) { return 0.5 * (1.0 + x1 * x1 / (1.0 + x1 * x1)); };
  const auto dscale = [](double x1) { return x1 / ((1.0 + x1 * x1) * (1.0 + x1 * x1)); };
  const auto rot = [](double t) {
    Matrix r(2, 2);
    r << std::cos(0.5 * t), -std::sin(0.5 * t), std::sin(0.5 * t), std::cos(0.5 * t);
    return r;
  };
  p.control_matrix = [=](double t, const Vector& x) { return Matrix(scale(x[0]) * rot(t)); };
  p.control_matrix_gradient = [=](double t, const Vector& x) {
    Matrix drot(2, 2);
    drot << -0.5 * std::sin(0.5 * t), -0.5 * std::cos(0.5 * t), 0.5 * std::cos(0.5 * t),
        -0.5 * std::sin(0.5 * t);
    return ControlMatrixGradient{scale(x[0]) * drot,
                                 {Matrix(dscale(x[0]) * rot(t)), Matrix::Zero(2, 2)}};
  };
  p.growth = [](double r) { return 0.5 + 0.5 * r * r; };
  p.mu = 1.0;
  p.xi = 2.0;
  p.delta = 1.0;
  p.c_g = 1.0;
  p.c_grad_g = 1.0;
  p.structure = Structure::General;
  return p;
}

inline Matrix random_controls(std::mt19937_64& rng, int m, int intervals, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Matrix u(m, intervals + 1);
  for (int j = 0; j < u.cols(); ++j)
    for (int i = 0; i < m; ++i) u(i, j) = d(rng);
  return u;
}

}  // namespace apriori::testing
