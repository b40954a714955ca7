// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include "apriori/csv.hpp"

#include <charconv>
#include <fmt/format.h>
#include <istream>
#include <ostream>
#include <sstream>

namespace apriori::csv {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

namespace {

void header(std::ostream& os, std::initializer_list<std::pair<const char*, int>> columns) {
  bool first = true;
  for (const auto& [name, count] : columns) {
    if (count < 0) {
      os << (first ? "" : ",") << name;
      first = false;
      continue;
    }
    for (int i = 1; i <= count; ++i) {
      os << (first ? "" : ",") << name << '_' << i;
      first = false;
    }
  }
  os << '\n';
}

void cells(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ',' << format_double(v[i]);
}

}  // namespace

void write_solution(std::ostream& os, const ControlSolution& sol) {
  header(os, {{"t", -1}, {"u", static_cast<int>(sol.u.rows())}, {"x", static_cast<int>(sol.x.rows())}});
  for (Eigen::Index i = 0; i < sol.grid.size(); ++i) {
    os << format_double(sol.grid[i]);
    cells(os, sol.u.col(i));
    cells(os, sol.x.col(i));
    os << '\n';
  }
}

void write_time_optimal(std::ostream& os, const TimeOptimalTrajectory& traj) {
  header(os, {{"tau", -1}, {"t", -1}, {"y", static_cast<int>(traj.y.rows())},
              {"w", static_cast<int>(traj.w.rows())}});
  for (Eigen::Index k = 0; k < traj.tau.size(); ++k) {
    os << format_double(traj.tau[k]) << ',' << format_double(traj.t[k]);
    cells(os, traj.y.col(k));
    cells(os, traj.w.col(k));
    os << '\n';
  }
}

void write_adjoint(std::ostream& os, const AdjointPath& adj) {
  header(os, {{"tau", -1}, {"q", -1}, {"p", static_cast<int>(adj.p.rows())}, {"H", -1},
              {"stat_residual", -1}});
  for (Eigen::Index k = 0; k < adj.tau.size(); ++k) {
    os << format_double(adj.tau[k]) << ',' << format_double(adj.q[k]);
    cells(os, adj.p.col(k));
    os << ',' << format_double(adj.hamiltonian[k]) << ',' << format_double(adj.stationarity[k])
       << '\n';
  }
}

void write_probes(std::ostream& os, const std::vector<InclusionProbe>& probes) {
  if (probes.empty()) {
    os << "t,support,rho\n";
    return;
  }
  const auto& f = probes.front();
  header(os, {{"t", -1}, {"y", static_cast<int>(f.y.size())}, {"d", static_cast<int>(f.direction.size())},
              {"support", -1}, {"rho", -1}, {"w", static_cast<int>(f.argmax_w.size())}});
  for (const auto& pr : probes) {
    os << format_double(pr.t);
    cells(os, pr.y);
    cells(os, pr.direction);
    os << ',' << format_double(pr.support_value) << ',' << format_double(pr.argmax_rho);
    cells(os, pr.argmax_w);
    os << '\n';
  }
}

Table read(std::istream& is) {
  Table table;
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::Io, "CSV is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorKind::Io, fmt::format("CSV line {}: '{}' is not a number", line_no, cell));
      }
      row.push_back(v);
    }
    if (row.size() != table.header.size()) {
      throw Error(ErrorKind::Io, fmt::format("CSV line {}: expected {} cells, got {}", line_no,
                                             table.header.size(), row.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

ControlSolution read_solution(std::istream& is, int dim_x, int dim_u) {
  const Table t = read(is);
  if (static_cast<int>(t.header.size()) != 1 + dim_u + dim_x || t.rows.size() < 2) {
    throw Error(ErrorKind::Io, "solution CSV does not match the problem dimensions");
  }
  const int nodes = static_cast<int>(t.rows.size());
  ControlSolution sol;
  sol.grid.resize(nodes);
  sol.u.resize(dim_u, nodes);
  sol.x.resize(dim_x, nodes);
  for (int i = 0; i < nodes; ++i) {
    sol.grid[i] = t.rows[i][0];
    for (int j = 0; j < dim_u; ++j) sol.u(j, i) = t.rows[i][1 + j];
    for (int j = 0; j < dim_x; ++j) sol.x(j, i) = t.rows[i][1 + dim_u + j];
  }
  return sol;
}

TimeOptimalTrajectory read_time_optimal(std::istream& is, int dim_x, int dim_u, double beta) {
  const Table t = read(is);
  if (static_cast<int>(t.header.size()) != 2 + dim_x + dim_u || t.rows.size() < 2) {
    throw Error(ErrorKind::Io, "time-optimal CSV does not match the problem dimensions");
  }
  const int nodes = static_cast<int>(t.rows.size());
  TimeOptimalTrajectory traj;
  traj.beta = beta;
  traj.tau.resize(nodes);
  traj.t.resize(nodes);
  traj.y.resize(dim_x, nodes);
  traj.w.resize(dim_u, nodes);
  for (int k = 0; k < nodes; ++k) {
    traj.tau[k] = t.rows[k][0];
    traj.t[k] = t.rows[k][1];
    for (int j = 0; j < dim_x; ++j) traj.y(j, k) = t.rows[k][2 + j];
    for (int j = 0; j < dim_u; ++j) traj.w(j, k) = t.rows[k][2 + dim_x + j];
  }
  traj.T = traj.tau[nodes - 1];
  return traj;
}

}  // namespace apriori::csv
