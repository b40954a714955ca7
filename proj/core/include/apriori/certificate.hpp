// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "apriori/problem.hpp"

namespace apriori {

enum class Theorem { Theorem1, Theorem2 };
enum class TheoremSelector { Auto, Force1, Force2 };

const char* to_string(Theorem t);
const char* to_string(TheoremSelector s);
TheoremSelector parse_theorem_selector(std::string_view text);

/// Grid resolutions and tolerances of the constants pipeline. A value of 0
/// for a per-axis count means "pick by dimension" (dense for n = 1).
struct CertificateOptions {
  double r_max = 1e3;
  int r_grid = 1000;
  int quadrature_panels = 1000;

  int t_points = 101;
  int x_points = 0;

  int sigma_t_points = 21;
  int sigma_x_points = 0;
  int sigma_u_points = 0;
  double sigma_r_max = 1e4;
  double sigma_tol = 1e-8;

  double t0_margin = 1e-9;
  std::optional<double> fixed_t0;

  int eta_points = 20001;
  double eta_r_max = 1e6;

  int samples = 10000;
  double u_cap = 50.0;
  std::uint64_t seed = 0;
};

struct ConditionCheck {
  std::string name;
  bool passed = true;
  /// Smallest observed (right side - left side) over all samples.
  double margin = 0.0;
  double t = 0.0;
  Vector x;
  Vector u;
  Vector v;
};

struct ConditionReport {
  std::vector<ConditionCheck> checks;
  int samples = 0;
  double u_cap = 0.0;
  double x_radius = 0.0;

  bool all_passed() const;
  const ConditionCheck& at(std::string_view name) const;
};

/// All constants of the bound together with the bound itself. Fields are
/// filled progressively by compute_constants, choose_t0 and compute_bound.
struct Certificate {
  std::string problem;
  Structure structure = Structure::General;

  double r0 = 0.0;
  double c = 0.0;
  double R_omega = 0.0;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double T0 = 0.0;
  double beta = 0.0;
  std::optional<double> eta;
  std::optional<double> gamma;

  double ell = 0.0;
  double ell_growth_branch = 0.0;
  double ell_linear_branch = 0.0;
  std::optional<Theorem> theorem_used;

  ConditionReport conditions;
  CertificateOptions options;
};

/// Smallest r such that theta(s)/s >= 1 for all s in [r, r_max], located on a
/// uniform grid and sharpened by bisection inside the crossing cell. Floored at
/// 1e-6. Throws Error(Certificate) when theta(r_max)/r_max < 1.
double find_r0(const ProblemSpec& p, double r_max = 1e3, int grid_n = 1000);

/// r0, c = r0 + int_0^1 L(t,0,0) dt, R_omega = c_g c, Lambda0, Lambda1.
Certificate compute_constants(const ProblemSpec& p, const CertificateOptions& opts = {});

/// sigma(r) = max over Omega x {|u| <= r} of <grad_u L, u> - L.
double sigma(const ProblemSpec& p, const Certificate& cert, double r,
             const CertificateOptions& opts = {});

/// Smallest r with sigma(r) >= target, by bisection to opts.sigma_tol.
double sigma_inverse(const ProblemSpec& p, const Certificate& cert, double target,
                     const CertificateOptions& opts = {});

struct T0Choice {
  double T0 = 0.0;
  double beta = 0.0;
};

/// Largest T0 in {0.99, 0.98, ..., 0.01} with sigma((c+1)/T0) > delta/xi, or
/// opts.fixed_t0 when set.
T0Choice choose_t0(const ProblemSpec& p, const Certificate& cert,
                   const CertificateOptions& opts = {});

/// sup_{r >= 0} r / (theta(r) + beta) on a log grid with a decreasing-tail test.
double compute_eta(const ProblemSpec& p, double beta, const CertificateOptions& opts = {});

double compute_gamma(const ProblemSpec& p, double eta, double lambda0, double beta);

struct BoundBranches {
  double growth = 0.0;
  double linear = 0.0;
  double ell() const { return growth > linear ? growth : linear; }
};

/// Pure arithmetic of the two explicit bounds. gamma is ignored for Theorem1.
/// The linear branch is max{(L1 + sqrt(L1^2 + 4 mu L0))/2, the same / mu}.
BoundBranches bound_formula(Theorem theorem, double mu, double xi, double lambda0,
                            double lambda1, double beta, double gamma = 0.0);

/// Fills eta/gamma (time-varying g) and ell. Throws Error(Certificate) for
/// Structure::General.
Certificate compute_bound(const ProblemSpec& p, Certificate cert,
                          const CertificateOptions& opts = {});

struct VerifyOptions {
  int samples = 10000;
  double u_cap = 50.0;
  double x_radius = 10.0;
  std::uint64_t seed = 0;
};

/// Quasi-random sampling check of the four structural conditions with the
/// declared constants. Failures are recorded in the report, never thrown.
ConditionReport verify_conditions(const ProblemSpec& p, const VerifyOptions& opts = {});

/// Resolves the selector against the problem structure; mismatches are
/// configuration errors.
Theorem resolve_theorem(const ProblemSpec& p, TheoremSelector selector);

/// Full pipeline: constants, condition sampling on Omega, T0/beta, bound.
Certificate certify(const ProblemSpec& p, const CertificateOptions& opts = {},
                    TheoremSelector selector = TheoremSelector::Auto);

nlohmann::json to_json(const Certificate& cert);
nlohmann::json to_json(const ConditionReport& report);
Certificate certificate_from_json(const nlohmann::json& j);

}  // namespace apriori
