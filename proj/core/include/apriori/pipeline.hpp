// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "apriori/certificate.hpp"
#include "apriori/solver.hpp"

namespace apriori {

enum class ExitCode : int {
  Ok = 0,
  Internal = 1,
  Config = 2,
  Conditions = 3,
  Certificate = 4,
  Solver = 5,
  Reparam = 6,
  Adjoint = 7,
  Bound = 8,
  Inclusion = 9,
  Io = 10,
};

struct RunConfig {
  std::string problem = "lq-tracking";
  ParameterMap overrides;
  SolverOptions solver;
  CertificateOptions certificate;
  TheoremSelector theorem = TheoremSelector::Auto;
  std::filesystem::path out_dir = "out";
  /// Source of prior artifacts for `verify`; empty means out_dir.
  std::filesystem::path in_dir;
  /// The time-optimal grid has tau_factor * N intervals.
  int tau_factor = 4;

  bool emit_trajectories = true;
  bool emit_adjoint = true;
  bool emit_probes = true;
  int probe_points = 8;
  int probe_directions = 16;
  int lipschitz_pairs = 1000;
};

/// Applies one `key = value` setting. Recognized keys:
///   problem.name, problem.overrides.<param>, solver.n, solver.tol,
///   solver.max_iter, certificate.grid_n, certificate.t0, certificate.samples,
///   certificate.u_cap, certificate.seed, theorem, output.dir, input.dir,
///   reparam.tau_factor, emit.trajectories, emit.adjoint, emit.probes,
///   probes.points, probes.directions, probes.pairs.
/// Throws Error(Config) on unknown keys or malformed values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses `key = value` lines; `#` starts a comment.
void apply_config_text(RunConfig& cfg, std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

struct RunResult {
  ExitCode exit_code = ExitCode::Ok;
  nlohmann::json summary;
};

/// problem -> conditions -> certificate -> solve -> reparameterize ->
/// adjoint checks -> inclusion probes. Writes certificate.json, solution.csv,
/// timeoptimal.csv, adjoint.csv, pmp_report.json, probes.csv and summary.json
/// into cfg.out_dir. The exit code names the first failing stage.
RunResult run_pipeline(const RunConfig& cfg);

/// Certificate only: certificate.json + summary.json.
RunResult run_certify(const RunConfig& cfg);

/// Solver only: solution.csv + summary.json.
RunResult run_solve(const RunConfig& cfg);

/// Adjoint verification from prior certificate.json and timeoptimal.csv in
/// cfg.in_dir (or cfg.out_dir): adjoint.csv, pmp_report.json, summary.json.
RunResult run_verify(const RunConfig& cfg);

/// JSON text with every floating-point number rendered as "%.17g" and keys in
/// sorted order; non-finite numbers become null.
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace apriori
