// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "apriori/inclusion.hpp"
#include "apriori/pmp.hpp"
#include "apriori/reparam.hpp"
#include "apriori/solver.hpp"

namespace apriori::csv {

/// "%.17g" rendering shared by every CSV artifact.
std::string format_double(double v);

/// t, u_1..u_m, x_1..x_n
void write_solution(std::ostream& os, const ControlSolution& sol);
/// tau, t, y_1..y_n, w_1..w_m
void write_time_optimal(std::ostream& os, const TimeOptimalTrajectory& traj);
/// tau, q, p_1..p_n, H, stat_residual
void write_adjoint(std::ostream& os, const AdjointPath& adj);
/// t, y.., d.., support, rho, w..
void write_probes(std::ostream& os, const std::vector<InclusionProbe>& probes);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Parses a numeric CSV with one header line. Throws Error(Io).
Table read(std::istream& is);

/// Rebuilds grid, u and x from a solution CSV (cost and diagnostics are not
/// stored there and are left at their defaults).
ControlSolution read_solution(std::istream& is, int dim_x, int dim_u);

TimeOptimalTrajectory read_time_optimal(std::istream& is, int dim_x, int dim_u, double beta);

}  // namespace apriori::csv
