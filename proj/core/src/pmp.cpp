// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include "apriori/pmp.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace apriori {

namespace {

// Problem data frozen at one point of the trajectory.
struct Frozen {
  double a = 0.0;  // L + beta
  double lt = 0.0;
  Vector lx;
  Vector lw;
  Matrix g;
  Matrix gt;
  std::vector<Matrix> gx;
  Vector w;
  double l = 0.0;
};

Frozen freeze(const ProblemSpec& p, double beta, double t, const Vector& y, const Vector& w) {
  const Evaluation e = evaluate(p, t, y, w);
  Frozen f;
  f.l = e.cost_density;
  f.a = e.cost_density + beta;
  f.lt = e.lagrangian_gradient.dt;
  f.lx = e.lagrangian_gradient.dx;
  f.lw = e.lagrangian_gradient.du;
  f.g = control_matrix(p, t, y);
  f.gt = e.control_matrix_gradient.dt;
  f.gx = e.control_matrix_gradient.dx;
  f.w = w;
  return f;
}

struct State {
  double q;
  Vector p;
};

State rhs(const Frozen& f, const State& z) {
  const Vector gw = f.g * f.w;
  const double s = z.q + gw.dot(z.p);
  const double a2 = f.a * f.a;
  State d;
  d.q = -(f.gt * f.w).dot(z.p) / f.a + s * f.lt / a2;
  d.p.resize(z.p.size());
  for (Eigen::Index k = 0; k < z.p.size(); ++k) {
    d.p[k] = -(f.gx[k] * f.w).dot(z.p) / f.a + s * f.lx[k] / a2;
  }
  return d;
}

State axpy(const State& z, double h, const State& d) { return {z.q + h * d.q, z.p + h * d.p}; }

}  // namespace

AdjointPath integrate_adjoint(const ProblemSpec& p, const Certificate& cert,
                              const TimeOptimalTrajectory& traj) {
  const int M = traj.intervals();
  if (M < 1) throw Error(ErrorKind::Adjoint, "trajectory needs at least two nodes");
  const double beta = traj.beta;
  if (std::abs(beta - cert.beta) > 1e-12 * (1.0 + std::abs(cert.beta))) {
    throw Error(ErrorKind::Adjoint,
                fmt::format("trajectory was built with beta = {} but the certificate has beta = {}",
                            beta, cert.beta));
  }

  std::vector<Frozen> node(M + 1);
  for (int k = 0; k <= M; ++k) node[k] = freeze(p, beta, traj.t[k], traj.y.col(k), traj.w.col(k));

  AdjointPath adj;
  adj.h = 1.0;
  adj.tau = traj.tau;
  adj.q.resize(M + 1);
  adj.p.resize(p.dim_x, M + 1);

  State z{adj.h * node[M].a, Vector::Zero(p.dim_x)};
  adj.q[M] = z.q;
  adj.p.col(M) = z.p;
  for (int k = M - 1; k >= 0; --k) {
    const double step = traj.tau[k + 1] - traj.tau[k];
    const Frozen mid = freeze(p, beta, 0.5 * (traj.t[k] + traj.t[k + 1]),
                              0.5 * (traj.y.col(k) + traj.y.col(k + 1)),
                              0.5 * (traj.w.col(k) + traj.w.col(k + 1)));
    const State k1 = rhs(node[k + 1], z);
    const State k2 = rhs(mid, axpy(z, -0.5 * step, k1));
    const State k3 = rhs(mid, axpy(z, -0.5 * step, k2));
    const State k4 = rhs(node[k], axpy(z, -step, k3));
    z.q -= step / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
    z.p -= step / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    if (!std::isfinite(z.q) || !z.p.allFinite()) {
      throw Error(ErrorKind::Adjoint, fmt::format("adjoint blow-up at node {}", k));
    }
    adj.q[k] = z.q;
    adj.p.col(k) = z.p;
  }

  adj.hamiltonian.resize(M + 1);
  adj.stationarity.resize(M + 1);
  for (int k = 0; k <= M; ++k) {
    const Frozen& f = node[k];
    const Vector pk = adj.p.col(k);
    const double s = adj.q[k] + (f.g * f.w).dot(pk);
    adj.hamiltonian[k] = s / f.a;
    adj.stationarity[k] = (f.g.transpose() * pk / f.a - s * f.lw / (f.a * f.a)).norm();
  }
  return adj;
}

bool PmpReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const PmpCheck& PmpReport::at(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw Error(ErrorKind::Adjoint, fmt::format("no PMP check named '{}'", name));
}

namespace {

// Tracks the node with the largest value of ratio = value / limit.
struct Worst {
  PmpCheck check;
  double ratio = -1.0;
  bool any = false;

  Worst(std::string name, double limit) {
    check.name = std::move(name);
    check.limit = limit;
  }

  // Records a node where `value` must not exceed `limit`.
  void le(int node, double value, double limit) {
    any = true;
    const double r = limit > 0.0 ? value / limit : (value > 0.0 ? HUGE_VAL : 0.0);
    if (r > ratio) {
      ratio = r;
      check.worst_node = node;
      check.worst_value = value;
      check.limit = limit;
    }
    if (!(value <= limit)) check.passed = false;
  }

  PmpCheck done() {
    check.applicable = any;
    return check;
  }
};

}  // namespace

PmpReport residual_report(const ProblemSpec& p, const Certificate& cert,
                          const TimeOptimalTrajectory& traj, const AdjointPath& adj,
                          const PmpTolerances& tol) {
  const int M = traj.intervals();
  const double beta = traj.beta;
  PmpReport rep;
  rep.T_hat = traj.T;

  Worst terminal("terminal_p_zero", 0.0);
  Worst stationarity("stationarity", tol.stationarity);
  Worst hamiltonian("hamiltonian_constancy", tol.hamiltonian);
  Worst positive("hamiltonian_positive", 0.0);
  Worst small_q("small_q_control", 0.0);
  Worst ratio("ratio_bound", cert.gamma.value_or(0.0));
  Worst multiplier("multiplier_size", (cert.lambda0 + beta) * p.xi);
  // equality is attained when u = 0 is optimal and L(t,0,0) = Lambda0
  const double horizon_limit = (cert.lambda0 + beta) * (1.0 + 1e-12);
  Worst horizon("horizon", horizon_limit);
  Worst ident("multiplier_identity", tol.identity);
  Worst growth("growth_inequality", 0.0);
  Worst nonzero("multiplier_nonzero", 0.0);
  Worst drift("q_drift", tol.q_drift);

  const bool autonomous = p.structure == Structure::Autonomous;
  const bool theorem2 = cert.theorem_used == Theorem::Theorem2;
  const double small_q_threshold = (cert.c + 1.0) / cert.T0;

  terminal.le(M, adj.p.col(M).norm(), 0.0);
  horizon.le(M, traj.T, horizon_limit);

  for (int k = 0; k <= M; ++k) {
    const Vector w = traj.w.col(k);
    const Vector pk = adj.p.col(k);
    const double qk = adj.q[k];
    const double pn = pk.norm();
    const double wn = w.norm();
    rep.max_w = std::max(rep.max_w, wn);
    const Evaluation e = evaluate(p, traj.t[k], traj.y.col(k), w);
    const double a = e.cost_density + beta;
    const double gwp = e.velocity.dot(pk);

    stationarity.le(k, adj.stationarity[k], tol.stationarity * (1.0 + pn));
    hamiltonian.le(k, std::abs(adj.hamiltonian[k] - adj.h) / adj.h, tol.hamiltonian);
    // H > 0 recorded as -H <= 0
    positive.le(k, -adj.hamiltonian[k], 0.0);
    multiplier.le(k, pn / adj.h, (cert.lambda0 + beta) * p.xi);

    if (qk <= 0.0) {
      // |w| > (c+1)/T0 recorded as threshold - |w| < 0
      small_q.le(k, small_q_threshold - wn, 0.0);
      if (!(wn > small_q_threshold)) small_q.check.passed = false;
    }
    if (theorem2 && qk < 0.0 && pn >= tol.ratio_p_floor) {
      ratio.le(k, std::abs(qk) / pn, cert.gamma.value_or(0.0));
    }

    const double identity = a * gwp - (qk + gwp) * e.lagrangian_gradient.du.dot(w);
    ident.le(k, std::abs(identity), tol.identity * (1.0 + pn) * (1.0 + wn) * a * a);

    const double lhs = 0.5 * p.mu * wn * wn;
    const double rhs = cert.lambda0 + beta + (qk < 0.0 ? std::abs(qk) / adj.h : 0.0);
    growth.le(k, lhs - rhs, 1e-9 * (1.0 + rhs));

    // (q, p) != 0 recorded as -(|q| + |p|) < 0
    nonzero.le(k, -(std::abs(qk) + pn), 0.0);
    if (std::abs(qk) + pn == 0.0) nonzero.check.passed = false;

    if (autonomous) drift.le(k, std::abs(qk - adj.q[M]), tol.q_drift);
  }
  // strict positivity; le() alone would accept H == 0
  for (int k = 0; k <= M; ++k) {
    if (!(adj.hamiltonian[k] > 0.0)) positive.check.passed = false;
  }

  rep.q_drift = autonomous ? drift.check.worst_value : 0.0;
  rep.checks = {terminal.done(), stationarity.done(), hamiltonian.done(), positive.done(),
                small_q.done(),  ratio.done(),        multiplier.done(),  horizon.done(),
                ident.done(),    growth.done(),       nonzero.done(),     drift.done()};
  return rep;
}

nlohmann::json to_json(const PmpReport& report) {
  nlohmann::json j;
  j["all_passed"] = report.all_passed();
  j["T_hat"] = report.T_hat;
  j["q_drift"] = report.q_drift;
  j["max_w"] = report.max_w;
  auto checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"status", !c.applicable ? "vacuous" : (c.passed ? "pass" : "fail")},
                      {"passed", c.passed},
                      {"applicable", c.applicable},
                      {"worst_node", c.worst_node},
                      {"worst_value", c.worst_value},
                      {"limit", c.limit}});
  }
  j["checks"] = checks;
  return j;
}

}  // namespace apriori
