// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "apriori/problem.hpp"

namespace apriori {

/// Element (v0, v) = (rho, rho g(t,y) w) / (L(t,y,w) + beta) of the relaxed
/// velocity set G(t, y), with the control set taken as all of R^m.
struct InclusionVelocity {
  double v0 = 0.0;
  Vector v;
};

InclusionVelocity inclusion_velocity(const ProblemSpec& p, double beta, double t, const Vector& y,
                                     double rho, const Vector& w);

struct InclusionProbe {
  double t = 0.0;
  Vector y;
  Vector direction;
  double support_value = 0.0;
  double argmax_rho = 0.0;
  Vector argmax_w;
  InclusionVelocity argmax_velocity;
};

struct SupportOptions {
  double r_max = 50.0;
  int radial_points = 401;
  /// Rays per unit sphere for m >= 2 (m = 1 always uses the two rays +-1).
  int rays = 64;
};

/// Support function of G(t, y) in a unit (1+n)-direction. rho only takes the
/// extreme values {0, 1} since the objective is linear in rho.
InclusionProbe support_function(const ProblemSpec& p, double beta, double t, const Vector& y,
                                const Vector& direction, const SupportOptions& opts = {});

struct VelocityBound {
  /// |v0| (theta(|w|) + beta) and |v| (theta(|w|) + beta) / (c_g |w|); both
  /// must stay <= 1.
  double v0_ratio = 0.0;
  double v_ratio = 0.0;
  bool passed = true;
};

VelocityBound check_velocity_bound(const ProblemSpec& p, double beta, const Vector& w,
                                   const InclusionVelocity& vel);

struct PointPair {
  double t1 = 0.0;
  Vector y1;
  double t2 = 0.0;
  Vector y2;
};

struct LipschitzOptions {
  double w_max = 10.0;
  int w_points = 41;
  double tol = 1e-6;
};

struct LipschitzReport {
  int pairs = 0;
  int panel_size = 0;
  double v0_constant = 0.0;  // xi / beta
  double v_constant = 0.0;   // c_grad_g / beta + eta xi c_g
  double worst_v0_ratio = 0.0;
  double worst_v_ratio = 0.0;
  int worst_v0_pair = -1;
  int worst_v_pair = -1;
  bool passed = true;
};

/// Compares velocity differences for a fixed panel of (rho = 1, w) against the
/// Lipschitz estimates of G over pairs of base points.
LipschitzReport lipschitz_probe(const ProblemSpec& p, double beta, double eta,
                                const std::vector<PointPair>& pairs,
                                const LipschitzOptions& opts = {});

}  // namespace apriori
