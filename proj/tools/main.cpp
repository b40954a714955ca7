// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apriori/pipeline.hpp"

namespace {

struct Flags {
  std::string problem;
  std::vector<std::string> sets;
  std::string config;
  std::string theorem;
  std::string out;
  std::string in;
  int grid_n = 0;
  int solver_n = 0;
  double tol = 0.0;
  double t0 = 0.0;
  long long seed = -1;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--problem", f.problem, "built-in problem name");
  cmd->add_option("--set", f.sets, "override, k=v (config key or problem parameter)");
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--theorem", f.theorem, "auto | force-1 | force-2");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--grid-n", f.grid_n, "state-axis grid points for the constants")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--solver-n", f.solver_n, "solver intervals N")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "solver gradient tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--t0", f.t0, "fixed T0 instead of the grid policy")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", f.seed, "quasi-random sequence seed")->check(CLI::NonNegativeNumber);
}

apriori::RunConfig build_config(const Flags& f) {
  apriori::RunConfig cfg;
  if (!f.config.empty()) cfg = apriori::load_config(f.config);
  if (!f.problem.empty()) apriori::apply_setting(cfg, "problem.name", f.problem);
  if (!f.theorem.empty()) apriori::apply_setting(cfg, "theorem", f.theorem);
  if (!f.out.empty()) apriori::apply_setting(cfg, "output.dir", f.out);
  if (!f.in.empty()) apriori::apply_setting(cfg, "input.dir", f.in);
  if (f.grid_n > 0) apriori::apply_setting(cfg, "certificate.grid_n", std::to_string(f.grid_n));
  if (f.solver_n > 0) apriori::apply_setting(cfg, "solver.n", std::to_string(f.solver_n));
  if (f.tol > 0.0) cfg.solver.tol = f.tol;
  if (f.t0 > 0.0) cfg.certificate.fixed_t0 = f.t0;
  if (f.seed >= 0) cfg.certificate.seed = static_cast<std::uint64_t>(f.seed);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw apriori::Error(apriori::ErrorKind::Config, "--set expects k=v, got '" + kv + "'");
    }
    std::string key = kv.substr(0, eq);
    // bare names are problem parameters
    if (key.find('.') == std::string::npos && key != "theorem" && key != "seed") {
      key = "problem.overrides." + key;
    }
    apriori::apply_setting(cfg, key, kv.substr(eq + 1));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"A-priori control bounds: certify, solve and verify Lagrange problems"};
  app.require_subcommand(1);
  Flags f;
  auto* run = app.add_subcommand("run", "full pipeline");
  auto* certify = app.add_subcommand("certify", "certificate only");
  auto* solve = app.add_subcommand("solve", "solver only");
  auto* verify = app.add_subcommand("verify", "adjoint checks on prior artifacts");
  for (auto* c : {run, certify, solve, verify}) add_common(c, f);
  verify->add_option("--in", f.in, "directory holding certificate.json and timeoptimal.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(apriori::ExitCode::Config);
  }

  apriori::RunConfig cfg;
  try {
    cfg = build_config(f);
  } catch (const apriori::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(apriori::ExitCode::Config);
  }

  apriori::RunResult r;
  if (*run) r = apriori::run_pipeline(cfg);
  else if (*certify) r = apriori::run_certify(cfg);
  else if (*solve) r = apriori::run_solve(cfg);
  else r = apriori::run_verify(cfg);

  std::cout << apriori::dump_json(r.summary) << "\n";
  for (const auto& d : r.summary["diagnostics"]) {
    std::cerr << "error [" << d["stage"].get<std::string>() << "]: "
              << d["message"].get<std::string>() << "\n";
  }
  return static_cast<int>(r.exit_code);
}
