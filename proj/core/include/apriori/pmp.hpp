// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "apriori/certificate.hpp"
#include "apriori/reparam.hpp"

namespace apriori {

/// Multipliers (q, p) of the beta-shifted time-optimal problem along a
/// computed trajectory, normalized so that the constant Hamiltonian is h = 1.
struct AdjointPath {
  Vector tau;
  Vector q;
  Matrix p;
  double h = 1.0;
  /// (q + <g w, p>) / (L + beta) per node; should equal h.
  Vector hamiltonian;
  /// Norm of g^T p / (L+beta) - (q + <g w, p>) grad_w L / (L+beta)^2 per node.
  Vector stationarity;
};

/// Backward RK4 for
///
///   q' = -<g_t w, p>/(L+beta) + (q + <g w, p>) L_t/(L+beta)^2
///   p' = -grad_x<g w, p>/(L+beta) + (q + <g w, p>) grad_x L/(L+beta)^2
///
/// from p(T) = 0, q(T) = h (L(T) + beta), interpolating the trajectory
/// linearly in tau. Throws Error(Adjoint) on blow-up.
AdjointPath integrate_adjoint(const ProblemSpec& p, const Certificate& cert,
                              const TimeOptimalTrajectory& traj);

struct PmpTolerances {
  double stationarity = 1e-4;
  double hamiltonian = 1e-4;
  double q_drift = 1e-8;
  double identity = 1e-4;
  double ratio_p_floor = 1e-10;
};

struct PmpCheck {
  std::string name;
  bool passed = true;
  /// False when no node falls in the check's domain (e.g. no q <= 0 nodes).
  bool applicable = true;
  int worst_node = -1;
  double worst_value = 0.0;
  double limit = 0.0;
};

struct PmpReport {
  std::vector<PmpCheck> checks;
  double T_hat = 0.0;
  double q_drift = 0.0;
  double max_w = 0.0;

  bool all_passed() const;
  const PmpCheck& at(std::string_view name) const;
};

/// Evaluates every maximum-principle relation the bounds rely on. Failures are
/// report entries; nothing is thrown.
PmpReport residual_report(const ProblemSpec& p, const Certificate& cert,
                          const TimeOptimalTrajectory& traj, const AdjointPath& adj,
                          const PmpTolerances& tol = {});

nlohmann::json to_json(const PmpReport& report);

}  // namespace apriori
