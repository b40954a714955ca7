// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include "apriori/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "apriori/csv.hpp"
#include "apriori/inclusion.hpp"
#include "apriori/pmp.hpp"
#include "apriori/reparam.hpp"
#include "apriori/sampling.hpp"

namespace apriori {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::Config, fmt::format("{}: '{}' is not a finite number", key, text));
  }
  return v;
}

int parse_int(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v < 1 || v > 100000000) {
    throw Error(ErrorKind::Config, fmt::format("{}: '{}' is not a positive integer", key, text));
  }
  return static_cast<int>(v);
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw Error(ErrorKind::Config, fmt::format("{}: '{}' is not a boolean", key, text));
}

}  // namespace

void apply_setting(RunConfig& cfg, std::string_view raw_key, std::string_view value) {
  const std::string key = trim(raw_key);
  constexpr std::string_view kOverride = "problem.overrides.";
  if (key == "problem.name") {
    cfg.problem = trim(value);
  } else if (key.starts_with(kOverride) && key.size() > kOverride.size()) {
    cfg.overrides[key.substr(kOverride.size())] = parse_double(key, value);
  } else if (key == "solver.n") {
    cfg.solver.intervals = parse_int(key, value);
  } else if (key == "solver.tol") {
    cfg.solver.tol = parse_double(key, value);
  } else if (key == "solver.max_iter") {
    cfg.solver.max_iter = parse_int(key, value);
  } else if (key == "certificate.grid_n") {
    cfg.certificate.x_points = parse_int(key, value);
  } else if (key == "certificate.t0") {
    cfg.certificate.fixed_t0 = parse_double(key, value);
  } else if (key == "certificate.samples") {
    cfg.certificate.samples = parse_int(key, value);
  } else if (key == "certificate.u_cap") {
    cfg.certificate.u_cap = parse_double(key, value);
  } else if (key == "certificate.seed" || key == "seed") {
    cfg.certificate.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "theorem") {
    cfg.theorem = parse_theorem_selector(trim(value));
  } else if (key == "output.dir") {
    cfg.out_dir = trim(value);
  } else if (key == "input.dir") {
    cfg.in_dir = trim(value);
  } else if (key == "reparam.tau_factor") {
    cfg.tau_factor = parse_int(key, value);
  } else if (key == "emit.trajectories") {
    cfg.emit_trajectories = parse_bool(key, value);
  } else if (key == "emit.adjoint") {
    cfg.emit_adjoint = parse_bool(key, value);
  } else if (key == "emit.probes") {
    cfg.emit_probes = parse_bool(key, value);
  } else if (key == "probes.points") {
    cfg.probe_points = parse_int(key, value);
  } else if (key == "probes.directions") {
    cfg.probe_directions = parse_int(key, value);
  } else if (key == "probes.pairs") {
    cfg.lipschitz_pairs = parse_int(key, value);
  } else {
    throw Error(ErrorKind::Config, fmt::format("unknown configuration key '{}'", key));
  }
}

void apply_config_text(RunConfig& cfg, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Config, fmt::format("config line {}: expected key = value", line_no));
    }
    apply_setting(cfg, std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, fmt::format("cannot open config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg;
  apply_config_text(cfg, ss.str());
  return cfg;
}

// ---------------------------------------------------------------------------
// JSON output

namespace {

void dump_value(std::string& out, const nlohmann::json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent <= 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        dump_value(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_value(out, v, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt::format("{:.17g}", v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
  out << text;
}

template <typename Fn>
void write_stream(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
  fn(out);
}

ExitCode exit_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Registry: return ExitCode::Config;
    case ErrorKind::Certificate: return ExitCode::Certificate;
    case ErrorKind::Solver: return ExitCode::Solver;
    case ErrorKind::Reparam: return ExitCode::Reparam;
    case ErrorKind::Adjoint: return ExitCode::Adjoint;
    case ErrorKind::Io: return ExitCode::Io;
    case ErrorKind::Dimension:
    case ErrorKind::Evaluation: return ExitCode::Internal;
  }
  return ExitCode::Internal;
}

nlohmann::json config_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["problem"] = cfg.problem;
  j["overrides"] = nlohmann::json::object();
  for (const auto& [k, v] : cfg.overrides) j["overrides"][k] = v;
  j["solver"] = {{"n", cfg.solver.intervals}, {"tol", cfg.solver.tol},
                 {"max_iter", cfg.solver.max_iter}};
  j["theorem"] = to_string(cfg.theorem);
  j["tau_factor"] = cfg.tau_factor;
  return j;
}

// Runs one stage, converting library errors into a recorded failure.
class Stages {
 public:
  explicit Stages(nlohmann::json& summary) : summary_(summary) {}

  template <typename Fn>
  bool run(const char* name, Fn&& fn) {
    try {
      fn();
      return true;
    } catch (const Error& e) {
      fail(name, exit_for(e.kind()), e.what());
    } catch (const std::exception& e) {
      fail(name, ExitCode::Internal, e.what());
    }
    return false;
  }

  void fail(const char* stage, ExitCode code, const std::string& message) {
    summary_["diagnostics"].push_back({{"stage", stage}, {"message", message},
                                       {"exit_code", static_cast<int>(code)}});
    if (code_ == ExitCode::Ok) code_ = code;
  }

  ExitCode code() const { return code_; }

 private:
  nlohmann::json& summary_;
  ExitCode code_ = ExitCode::Ok;
};

RunResult finish(const RunConfig& cfg, nlohmann::json summary, const Stages& stages) {
  RunResult r;
  r.exit_code = stages.code();
  summary["exit_code"] = static_cast<int>(r.exit_code);
  summary["passed"] = r.exit_code == ExitCode::Ok;
  r.summary = summary;
  try {
    write_text(cfg.out_dir / "summary.json", dump_json(summary) + "\n");
  } catch (const Error&) {
    if (r.exit_code == ExitCode::Ok) r.exit_code = ExitCode::Io;
  }
  return r;
}

nlohmann::json base_summary(const RunConfig& cfg, const char* command) {
  nlohmann::json s;
  s["command"] = command;
  s["config"] = config_json(cfg);
  s["diagnostics"] = nlohmann::json::array();
  return s;
}

bool prepare_output(const RunConfig& cfg, Stages& stages) {
  return stages.run("output", [&] {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) {
      throw Error(ErrorKind::Io, fmt::format("cannot create '{}': {}", cfg.out_dir.string(),
                                             ec.message()));
    }
  });
}

std::vector<InclusionProbe> probe_inclusion(const ProblemSpec& p, const Certificate& cert,
                                            const RunConfig& cfg, nlohmann::json& out,
                                            bool& ok) {
  const int n = p.dim_x;
  Halton base(1 + n, cfg.certificate.seed);
  Halton dirs(1 + n, cfg.certificate.seed + 7);
  std::vector<Vector> directions;
  for (int i = 0; i < 1 + n; ++i) {
    directions.push_back(Vector::Unit(1 + n, i));
    directions.push_back(-Vector::Unit(1 + n, i));
  }
  while (static_cast<int>(directions.size()) < 2 * (1 + n) + cfg.probe_directions) {
    const auto z = dirs.next();
    Vector d(1 + n);
    for (int i = 0; i <= n; ++i) d[i] = 2.0 * z[i] - 1.0;
    if (d.norm() > 1e-3) directions.push_back(d.normalized());
  }

  std::vector<InclusionProbe> probes;
  double worst_v0 = 0.0, worst_v = 0.0, min_sym = 0.0, min_support = 0.0;
  bool bounds_ok = true;
  for (int b = 0; b < cfg.probe_points; ++b) {
    const auto z = base.next();
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = cert.R_omega * (2.0 * z[1 + i] - 1.0);
    if (y.norm() > cert.R_omega) y *= cert.R_omega / y.norm();
    std::vector<double> values;
    for (const auto& d : directions) {
      InclusionProbe pr = support_function(p, cert.beta, z[0], y, d);
      const VelocityBound vb = check_velocity_bound(p, cert.beta, pr.argmax_w, pr.argmax_velocity);
      worst_v0 = std::max(worst_v0, vb.v0_ratio);
      worst_v = std::max(worst_v, vb.v_ratio);
      bounds_ok = bounds_ok && vb.passed;
      min_support = std::min(min_support, pr.support_value);
      values.push_back(pr.support_value);
      probes.push_back(std::move(pr));
    }
    // directions come in +/- pairs for the first 2(1+n) entries
    for (int i = 0; i < 2 * (1 + n); i += 2) min_sym = std::min(min_sym, values[i] + values[i + 1]);
  }

  Halton pairs_seq(2 * (1 + n), cfg.certificate.seed + 13);
  std::vector<PointPair> pairs;
  for (int k = 0; k < cfg.lipschitz_pairs; ++k) {
    const auto z = pairs_seq.next();
    PointPair pp{z[0], Vector(n), z[1 + n], Vector(n)};
    for (int i = 0; i < n; ++i) {
      pp.y1[i] = cert.R_omega * (2.0 * z[1 + i] - 1.0);
      pp.y2[i] = cert.R_omega * (2.0 * z[2 + n + i] - 1.0);
    }
    if (pp.y1.norm() > cert.R_omega) pp.y1 *= cert.R_omega / pp.y1.norm();
    if (pp.y2.norm() > cert.R_omega) pp.y2 *= cert.R_omega / pp.y2.norm();
    pairs.push_back(std::move(pp));
  }
  const double eta = cert.eta ? *cert.eta : compute_eta(p, cert.beta, cert.options);
  const LipschitzReport lip = lipschitz_probe(p, cert.beta, eta, pairs);

  const bool membership = min_support >= 0.0 && min_sym >= 0.0;
  ok = bounds_ok && membership && lip.passed;
  out = {{"probes", static_cast<int>(probes.size())},
         {"velocity_bounds", {{"passed", bounds_ok}, {"worst_v0_ratio", worst_v0},
                              {"worst_v_ratio", worst_v}}},
         {"origin_membership", {{"passed", membership}, {"min_support", min_support},
                                {"min_symmetric_sum", min_sym}}},
         {"lipschitz", {{"passed", lip.passed}, {"pairs", lip.pairs}, {"panel", lip.panel_size},
                        {"eta", eta}, {"v0_constant", lip.v0_constant},
                        {"v_constant", lip.v_constant}, {"worst_v0_ratio", lip.worst_v0_ratio},
                        {"worst_v_ratio", lip.worst_v_ratio}}},
         {"passed", ok}};
  return probes;
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump_value(out, j, indent, 0);
  return out;
}

RunResult run_certify(const RunConfig& cfg) {
  nlohmann::json summary = base_summary(cfg, "certify");
  Stages stages(summary);
  if (!prepare_output(cfg, stages)) return finish(cfg, summary, stages);
  ProblemSpec p;
  Certificate cert;
  const bool ok = stages.run("problem", [&] { p = builtin(cfg.problem, cfg.overrides); }) &&
                  stages.run("certificate", [&] {
                    cert = certify(p, cfg.certificate, cfg.theorem);
                    write_text(cfg.out_dir / "certificate.json", dump_json(to_json(cert)) + "\n");
                  });
  if (ok) {
    summary["certificate"] = {{"theorem", to_string(*cert.theorem_used)}, {"ell", cert.ell},
                              {"conditions_passed", cert.conditions.all_passed()}};
    if (!cert.conditions.all_passed()) {
      stages.fail("conditions", ExitCode::Conditions, "sampled conditions C1-C4 failed");
    }
  }
  return finish(cfg, summary, stages);
}

RunResult run_solve(const RunConfig& cfg) {
  nlohmann::json summary = base_summary(cfg, "solve");
  Stages stages(summary);
  if (!prepare_output(cfg, stages)) return finish(cfg, summary, stages);
  ProblemSpec p;
  ControlSolution sol;
  const bool ok = stages.run("problem", [&] { p = builtin(cfg.problem, cfg.overrides); }) &&
                  stages.run("solve", [&] {
                    sol = solve(p, cfg.solver);
                    write_stream(cfg.out_dir / "solution.csv",
                                 [&](std::ostream& os) { csv::write_solution(os, sol); });
                  });
  if (ok) {
    summary["solution"] = {{"cost", sol.cost}, {"iterations", sol.iterations},
                           {"grad_norm_final", sol.grad_norm_final}, {"converged", sol.converged},
                           {"max_u", max_control_norm(sol.u)}};
    if (!sol.converged) stages.fail("solve", ExitCode::Solver, "solver did not converge");
  }
  return finish(cfg, summary, stages);
}

RunResult run_verify(const RunConfig& cfg) {
  nlohmann::json summary = base_summary(cfg, "verify");
  Stages stages(summary);
  if (!prepare_output(cfg, stages)) return finish(cfg, summary, stages);
  const auto in_dir = cfg.in_dir.empty() ? cfg.out_dir : cfg.in_dir;
  ProblemSpec p;
  Certificate cert;
  TimeOptimalTrajectory traj;
  AdjointPath adj;
  PmpReport report;
  const bool ok =
      stages.run("artifacts", [&] {
        std::ifstream cj(in_dir / "certificate.json");
        if (!cj) throw Error(ErrorKind::Io, "missing certificate.json in " + in_dir.string());
        nlohmann::json j;
        try {
          cj >> j;
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorKind::Io, fmt::format("certificate.json: {}", e.what()));
        }
        cert = certificate_from_json(j);
        if (cert.problem != cfg.problem) {
          throw Error(ErrorKind::Config, fmt::format("certificate is for '{}', not '{}'",
                                                     cert.problem, cfg.problem));
        }
        p = builtin(cfg.problem, cfg.overrides);
        std::ifstream tj(in_dir / "timeoptimal.csv");
        if (!tj) throw Error(ErrorKind::Io, "missing timeoptimal.csv in " + in_dir.string());
        traj = csv::read_time_optimal(tj, p.dim_x, p.dim_u, cert.beta);
      }) &&
      stages.run("adjoint", [&] {
        adj = integrate_adjoint(p, cert, traj);
        report = residual_report(p, cert, traj, adj);
        write_stream(cfg.out_dir / "adjoint.csv", [&](std::ostream& os) { csv::write_adjoint(os, adj); });
        write_text(cfg.out_dir / "pmp_report.json", dump_json(to_json(report)) + "\n");
      });
  if (ok) {
    summary["pmp"] = {{"passed", report.all_passed()}, {"T_hat", report.T_hat}};
    if (!report.all_passed()) stages.fail("adjoint", ExitCode::Adjoint, "PMP checks failed");
  }
  return finish(cfg, summary, stages);
}

RunResult run_pipeline(const RunConfig& cfg) {
  nlohmann::json summary = base_summary(cfg, "run");
  Stages stages(summary);
  if (!prepare_output(cfg, stages)) return finish(cfg, summary, stages);

  ProblemSpec p;
  if (!stages.run("problem", [&] { p = builtin(cfg.problem, cfg.overrides); })) {
    return finish(cfg, summary, stages);
  }

  Certificate cert;
  if (!stages.run("certificate", [&] {
        cert = certify(p, cfg.certificate, cfg.theorem);
        write_text(cfg.out_dir / "certificate.json", dump_json(to_json(cert)) + "\n");
      })) {
    return finish(cfg, summary, stages);
  }
  summary["certificate"] = {{"theorem", to_string(*cert.theorem_used)},
                            {"ell", cert.ell},
                            {"beta", cert.beta},
                            {"T0", cert.T0},
                            {"c", cert.c},
                            {"lambda0", cert.lambda0},
                            {"lambda1", cert.lambda1},
                            {"conditions_passed", cert.conditions.all_passed()}};
  if (!cert.conditions.all_passed()) {
    stages.fail("conditions", ExitCode::Conditions, "sampled conditions C1-C4 failed");
  }

  ControlSolution sol;
  if (!stages.run("solve", [&] {
        sol = solve(p, cfg.solver);
        if (cfg.emit_trajectories) {
          write_stream(cfg.out_dir / "solution.csv",
                       [&](std::ostream& os) { csv::write_solution(os, sol); });
        }
      })) {
    return finish(cfg, summary, stages);
  }
  const double max_u = max_control_norm(sol.u);
  double max_x = 0.0;
  for (int i = 0; i < sol.x.cols(); ++i) max_x = std::max(max_x, sol.x.col(i).norm());
  const double l1 = l1_norm(sol);
  const bool bound_holds = max_u <= cert.ell;
  const bool l1_ok = l1 <= cert.c + 1e-6;
  const bool state_ok = max_x <= p.c_g * cert.c + 1e-6;
  summary["solution"] = {{"cost", sol.cost}, {"iterations", sol.iterations},
                         {"grad_norm_final", sol.grad_norm_final}, {"converged", sol.converged}};
  summary["bound_holds"] = bound_holds;
  summary["max_u"] = max_u;
  summary["ell"] = cert.ell;
  summary["a_priori_checks"] = {{"l1_control", l1},
                                {"l1_limit", cert.c},
                                {"l1_passed", l1_ok},
                                {"max_state", max_x},
                                {"state_limit", p.c_g * cert.c},
                                {"state_passed", state_ok}};
  if (!sol.converged) stages.fail("solve", ExitCode::Solver, "solver did not converge");
  if (!bound_holds) {
    stages.fail("bound", ExitCode::Bound,
                fmt::format("max |u| = {} exceeds ell = {}", max_u, cert.ell));
  }
  if (!l1_ok || !state_ok) {
    stages.fail("bound", ExitCode::Bound, "integral or state a-priori bound violated");
  }

  TimeOptimalTrajectory traj;
  if (!stages.run("reparam", [&] {
        const int M = cfg.tau_factor * sol.intervals();
        traj = to_time_optimal(p, sol, cert.beta, M);
        if (cfg.emit_trajectories) {
          write_stream(cfg.out_dir / "timeoptimal.csv",
                       [&](std::ostream& os) { csv::write_time_optimal(os, traj); });
        }
      })) {
    return finish(cfg, summary, stages);
  }
  const double equivalence = std::abs(traj.T - (sol.cost + cert.beta)) / traj.T;
  summary["reparam"] = {{"T", traj.T}, {"relative_equivalence_error", equivalence},
                        {"passed", equivalence <= 1e-8}};
  if (equivalence > 1e-8) {
    stages.fail("reparam", ExitCode::Reparam, "T differs from J + beta beyond 1e-8");
  }

  AdjointPath adj;
  PmpReport report;
  if (stages.run("adjoint", [&] {
        adj = integrate_adjoint(p, cert, traj);
        report = residual_report(p, cert, traj, adj);
        if (cfg.emit_adjoint) {
          write_stream(cfg.out_dir / "adjoint.csv",
                       [&](std::ostream& os) { csv::write_adjoint(os, adj); });
        }
        write_text(cfg.out_dir / "pmp_report.json", dump_json(to_json(report)) + "\n");
      })) {
    summary["pmp"] = {{"passed", report.all_passed()}, {"T_hat", report.T_hat},
                      {"q_drift", report.q_drift}};
    if (!report.all_passed()) stages.fail("adjoint", ExitCode::Adjoint, "PMP checks failed");
  }

  if (cfg.emit_probes) {
    stages.run("inclusion", [&] {
      nlohmann::json inc;
      bool ok = true;
      const auto probes = probe_inclusion(p, cert, cfg, inc, ok);
      write_stream(cfg.out_dir / "probes.csv",
                   [&](std::ostream& os) { csv::write_probes(os, probes); });
      summary["inclusion"] = inc;
      if (!ok) stages.fail("inclusion", ExitCode::Inclusion, "inclusion property checks failed");
    });
  }
  return finish(cfg, summary, stages);
}

}  // namespace apriori
