// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

// One PASS/FAIL line per acceptance criterion; exit status is the failure count.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "apriori/certificate.hpp"
#include "apriori/pipeline.hpp"
#include "apriori/pmp.hpp"
#include "apriori/reparam.hpp"
#include "apriori/sampling.hpp"
#include "apriori/solver.hpp"

namespace fs = std::filesystem;
using namespace apriori;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

struct Baseline {
  ProblemSpec p;
  Certificate cert;
  ControlSolution sol;
  TimeOptimalTrajectory traj;
  AdjointPath adj;
  PmpReport report;
};

const Baseline& baseline(const std::string& name) {
  static std::map<std::string, Baseline> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  Baseline b;
  b.p = builtin(name);
  b.cert = certify(b.p);
  b.sol = solve(b.p);
  b.traj = to_time_optimal(b.p, b.sol, b.cert.beta, 4 * b.sol.intervals());
  b.adj = integrate_adjoint(b.p, b.cert, b.traj);
  b.report = residual_report(b.p, b.cert, b.traj, b.adj);
  return cache.emplace(name, std::move(b)).first->second;
}

std::vector<std::string> autonomous() {
  std::vector<std::string> out;
  for (const auto& n : builtin_names()) {
    if (builtin(n).structure == Structure::Autonomous) out.push_back(n);
  }
  return out;
}

Outcome lq_oracle() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const ControlSolution sol = solve(builtin("lq-tracking"));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double u0_err = std::abs(sol.u(0, 0) - std::tanh(1.0));
  const double cost_err = std::abs(sol.cost - (0.1 + std::tanh(1.0) / 2.0));
  o.require(sol.converged, "solver did not converge");
  o.require(u0_err <= 1e-3, fmt::format("|u(0)-tanh 1| = {:.3g}", u0_err));
  o.require(cost_err <= 1e-4, fmt::format("|J-J*| = {:.3g}", cost_err));
  o.require(secs <= 10.0, fmt::format("runtime {:.2f}s", secs));
  o.note(fmt::format("u(0)={:.6f} err {:.2e}, J={:.6f} err {:.2e}, {:.2f}s", sol.u(0, 0), u0_err,
                     sol.cost, cost_err, secs));
  return o;
}

Outcome theorem1_bound() {
  Outcome o;
  for (const auto& n : autonomous()) {
    const auto& b = baseline(n);
    const double mu = max_control_norm(b.sol.u);
    o.require(b.cert.theorem_used == Theorem::Theorem1, n + " not certified with the autonomous bound");
    o.require(mu <= b.cert.ell, fmt::format("{}: max|u|={} > ell={}", n, mu, b.cert.ell));
    o.note(fmt::format("{} max|u|={:.4f} <= ell={:.4f}", n, mu, b.cert.ell));
  }
  const auto& lq = baseline("lq-tracking");
  o.require(std::abs(lq.cert.ell - 4.97) <= 0.05 * 4.97, fmt::format("lq ell={}", lq.cert.ell));
  o.require(std::abs(lq.cert.lambda0 - 6.205) <= 1e-3, "lq Lambda0");
  o.require(std::abs(lq.cert.beta - 6.13) <= 1e-2, "lq beta");
  o.require(lq.cert.lambda1 == 0.0 && lq.p.mu == 1.0, "lq mu/Lambda1");
  return o;
}

Outcome theorem2_bound() {
  Outcome o;
  const auto& b = baseline("lq-tv");
  const double mu = max_control_norm(b.sol.u);
  o.require(b.cert.theorem_used == Theorem::Theorem2, "lq-tv not certified with the time-varying bound");
  o.require(b.cert.eta && b.cert.gamma, "eta/gamma missing");
  o.require(mu <= b.cert.ell, fmt::format("max|u|={} > ell={}", mu, b.cert.ell));
  const PmpCheck& ratio = b.report.at("ratio_bound");
  o.require(ratio.passed, fmt::format("ratio |q|/|p| = {} > gamma", ratio.worst_value));
  o.note(fmt::format("max|u|={:.4f} <= ell={:.6g} (eta={:.6g}, gamma={:.6g}); ratio check {}", mu,
                     b.cert.ell, b.cert.eta.value_or(0), b.cert.gamma.value_or(0),
                     ratio.applicable ? fmt::format("worst {:.3g}", ratio.worst_value)
                                      : std::string("vacuous: no node with q < 0")));
  return o;
}

Outcome gradient_check() {
  Outcome o;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  const int N = 32;
  const double h = 1e-6;
  for (const auto& n : builtin_names()) {
    const auto p = builtin(n);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      Matrix u(p.dim_u, N + 1);
      for (auto& v : u.reshaped()) v = d(rng);
      const CostGradient cg = cost_and_gradient(p, u);
      Matrix fd(u.rows(), u.cols());
      for (Eigen::Index k = 0; k < u.size(); ++k) {
        Matrix up = u, um = u;
        up.reshaped()[k] += h;
        um.reshaped()[k] -= h;
        fd.reshaped()[k] = (trapezoid_cost(p, up, integrate_state(p, up)) -
                            trapezoid_cost(p, um, integrate_state(p, um))) /
                           (2 * h);
      }
      worst = std::max(worst, (cg.dcost - fd).norm() / fd.norm());
    }
    o.require(worst <= 1e-5, fmt::format("{} rel err {:.3g}", n, worst));
    o.note(fmt::format("{} {:.2e}", n, worst));
  }
  return o;
}

double round_trip(const ProblemSpec& p, const ControlSolution& sol, double beta, int M) {
  const auto traj = to_time_optimal(p, sol, beta, M);
  const auto back = from_time_optimal(p, traj, sol.intervals());
  return std::max((back.u - sol.u).cwiseAbs().maxCoeff(), (back.x - sol.x).cwiseAbs().maxCoeff());
}

Outcome equivalence() {
  Outcome o;
  constexpr double kFloor = 1e-14;
  for (const auto& n : builtin_names()) {
    const auto& b = baseline(n);
    const double rel = std::abs(b.traj.T - (b.sol.cost + b.cert.beta)) / b.traj.T;
    o.require(b.sol.converged, n + " did not converge");
    o.require(rel <= 1e-8, fmt::format("{} |T-(J+beta)|/T = {:.3g}", n, rel));
    const int N = b.sol.intervals();
    const double e1 = round_trip(b.p, b.sol, b.cert.beta, N);
    const double e2 = round_trip(b.p, b.sol, b.cert.beta, 2 * N);
    const double e4 = round_trip(b.p, b.sol, b.cert.beta, 4 * N);
    o.require(e4 <= 1e-4, fmt::format("{} round trip {:.3g} at 4N", n, e4));
    // an exactly recovered process (error at roundoff) cannot decrease further
    const bool floor = e1 <= kFloor && e2 <= kFloor && e4 <= kFloor;
    o.require(floor || (e2 < e1 && e4 < e2),
              fmt::format("{} round trip not decreasing: {:.3g} {:.3g} {:.3g}", n, e1, e2, e4));
    o.note(fmt::format("{} rel {:.1e}, rt {:.1e}/{:.1e}/{:.1e}", n, rel, e1, e2, e4));
  }
  return o;
}

Outcome lower_envelope() {
  Outcome o;
  for (const auto& n : builtin_names()) {
    const auto& b = baseline(n);
    const auto& c = b.cert;
    Halton h(1 + b.p.dim_x + b.p.dim_u, 1);
    double worst = -1e300;
    for (int s = 0; s < 10000; ++s) {
      const auto z = h.next();
      Vector x(b.p.dim_x), u(b.p.dim_u);
      for (int i = 0; i < b.p.dim_x; ++i) x[i] = c.R_omega * (2 * z[1 + i] - 1);
      if (x.norm() > c.R_omega) x *= c.R_omega / x.norm();
      for (int i = 0; i < b.p.dim_u; ++i) u[i] = 50.0 * (2 * z[1 + b.p.dim_x + i] - 1);
      const double lhs = -c.lambda0 - c.lambda1 * u.norm() + 0.5 * b.p.mu * u.squaredNorm();
      worst = std::max(worst, lhs - lagrangian(b.p, z[0], x, u));
    }
    o.require(worst <= 1e-9, fmt::format("{} envelope excess {:.3g}", n, worst));
    double sworst = -1e300;
    for (int i = 0; i < 100; ++i) {
      const double r = 0.1 * i;
      sworst = std::max(sworst, 0.5 * b.p.mu * r * r - c.lambda0 - sigma(b.p, c, r));
    }
    o.require(sworst <= 1e-9, fmt::format("{} sigma excess {:.3g}", n, sworst));
    o.note(fmt::format("{} max excess {:.2e}/{:.2e}", n, worst, sworst));
  }
  return o;
}

Outcome integral_bounds() {
  Outcome o;
  for (const auto& n : builtin_names()) {
    const auto& b = baseline(n);
    const double l1 = l1_norm(b.sol);
    double mx = 0.0;
    for (int i = 0; i < b.sol.x.cols(); ++i) mx = std::max(mx, b.sol.x.col(i).norm());
    o.require(l1 <= b.cert.c + 1e-6, fmt::format("{} int|u|={} > c={}", n, l1, b.cert.c));
    o.require(mx <= b.p.c_g * b.cert.c + 1e-6, fmt::format("{} max|x|={}", n, mx));
    o.note(fmt::format("{} {:.3f}<={:.3f}, {:.3f}<={:.3f}", n, l1, b.cert.c, mx,
                       b.p.c_g * b.cert.c));
  }
  return o;
}

Outcome adjoint() {
  Outcome o;
  for (const auto& n : builtin_names()) {
    const auto& b = baseline(n);
    const int M = b.traj.intervals();
    o.require(b.adj.p.col(M).norm() == 0.0, n + " p(T) != 0");
    double ham = 0.0, stat = 0.0;
    for (int k = 0; k <= M; ++k) {
      ham = std::max(ham, std::abs(b.adj.hamiltonian[k] - b.adj.h) / b.adj.h);
      stat = std::max(stat, b.adj.stationarity[k] / (1.0 + b.adj.p.col(k).norm()));
    }
    o.require(ham <= 1e-4, fmt::format("{} hamiltonian dev {:.3g}", n, ham));
    o.require(stat <= 1e-4, fmt::format("{} stationarity {:.3g}", n, stat));
    if (b.p.structure == Structure::Autonomous) {
      o.require(b.report.q_drift <= 1e-8, fmt::format("{} q drift {:.3g}", n, b.report.q_drift));
    }
    o.require(b.report.at("multiplier_size").passed, n + " |p|/h too large");
    o.require(b.report.at("horizon").passed, n + " T_hat > Lambda0 + beta");
    o.note(fmt::format("{} H {:.1e} stat {:.1e}", n, ham, stat));
  }
  return o;
}

Outcome inclusion(const fs::path& root) {
  Outcome o;
  for (const auto& n : builtin_names()) {
    RunConfig cfg;
    cfg.problem = n;
    cfg.out_dir = root / ("inclusion_" + n);
    cfg.lipschitz_pairs = 1000;
    const RunResult r = run_pipeline(cfg);
    const auto& inc = r.summary.at("inclusion");
    const auto& lip = inc.at("lipschitz");
    o.require(inc.at("velocity_bounds").at("passed").get<bool>(), n + " velocity bounds");
    o.require(lip.at("pairs").get<int>() == 1000, n + " pair count");
    o.require(lip.at("worst_v0_ratio").get<double>() <= 1 + 1e-6 &&
                  lip.at("worst_v_ratio").get<double>() <= 1 + 1e-6,
              n + " Lipschitz ratio");
    o.require(inc.at("origin_membership").at("passed").get<bool>(), n + " (0,0) membership");
    o.note(fmt::format("{} lip {:.3f}/{:.3f}", n, lip.at("worst_v0_ratio").get<double>(),
                       lip.at("worst_v_ratio").get<double>()));
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const fs::path& root) {
  Outcome o;
  for (const auto& n : builtin_names()) {
    RunConfig cfg;
    cfg.problem = n;
    cfg.out_dir = root / ("det_a_" + n);
    const auto ra = run_pipeline(cfg);
    cfg.out_dir = root / ("det_b_" + n);
    const auto rb = run_pipeline(cfg);
    o.require(ra.exit_code == ExitCode::Ok && rb.exit_code == ExitCode::Ok,
              fmt::format("{} exit {}", n, static_cast<int>(ra.exit_code)));
    int files = 0;
    for (const auto& e : fs::directory_iterator(root / ("det_a_" + n))) {
      const auto other = root / ("det_b_" + n) / e.path().filename();
      o.require(fs::exists(other) && slurp(e.path()) == slurp(other),
                fmt::format("{} {} differs", n, e.path().filename().string()));
      ++files;
    }
    o.note(fmt::format("{} {} files", n, files));
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root =
      argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "apriori_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"LQ closed-form oracle", lq_oracle},
      {"bound validity, autonomous", theorem1_bound},
      {"bound validity, time-varying g", theorem2_bound},
      {"adjoint gradient vs finite differences", gradient_check},
      {"reparameterization equivalence", equivalence},
      {"lower envelope inequalities", lower_envelope},
      {"integral and state bounds", integral_bounds},
      {"adjoint verification", adjoint},
      {"inclusion properties", [&] { return inclusion(root); }},
      {"determinism", [&] { return determinism(root); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.passed ? 0 : 1;
    std::printf("%s criterion %zu (%s): %s\n", o.passed ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
