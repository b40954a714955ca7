// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include "apriori/certificate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "apriori/sampling.hpp"
#include "search.hpp"

namespace apriori {

using detail::Axis;
using detail::BallBlock;

const char* to_string(Theorem t) {
  return t == Theorem::Theorem1 ? "Theorem1" : "Theorem2";
}

const char* to_string(TheoremSelector s) {
  switch (s) {
    case TheoremSelector::Auto: return "auto";
    case TheoremSelector::Force1: return "force-1";
    case TheoremSelector::Force2: return "force-2";
  }
  return "auto";
}

TheoremSelector parse_theorem_selector(std::string_view text) {
  if (text == "auto") return TheoremSelector::Auto;
  if (text == "force-1" || text == "1") return TheoremSelector::Force1;
  if (text == "force-2" || text == "2") return TheoremSelector::Force2;
  throw Error(ErrorKind::Config,
              fmt::format("unknown theorem selector '{}'; expected auto, force-1 or force-2", text));
}

bool ConditionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ConditionCheck& ConditionReport::at(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw Error(ErrorKind::Certificate, fmt::format("no condition named '{}'", name));
}

namespace {

constexpr double kR0Floor = 1e-6;

double checked(const ProblemSpec& p, double value, const char* what) {
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::Evaluation,
                fmt::format("problem evaluation failure in {} ({})", what, p.name));
  }
  return value;
}

int x_points_for(const ProblemSpec& p, int requested, int dense, int sparse) {
  if (requested > 0) return requested;
  return p.dim_x == 1 ? dense : sparse;
}

int u_points_for(const ProblemSpec& p, int requested) {
  if (requested > 0) return requested;
  return p.dim_u == 1 ? 41 : 9;
}

// Maps z = (t, x_1..x_n, u_1..u_m) onto Eigen vectors.
struct Unpacked {
  double t;
  Vector x;
  Vector u;
};

Unpacked unpack(std::span<const double> z, int n, int m) {
  Unpacked r{z[0], Vector(n), Vector(m)};
  for (int i = 0; i < n; ++i) r.x[i] = z[1 + i];
  for (int i = 0; i < m; ++i) r.u[i] = z[1 + n + i];
  return r;
}

// Maximum over Omega = [0,1] x R_omega B_n of f(t, x).
double maximize_over_omega(const ProblemSpec& p, const Certificate& cert,
                           const CertificateOptions& opts,
                           const std::function<double(double, const Vector&)>& f) {
  const int n = p.dim_x;
  std::vector<Axis> axes;
  axes.push_back({0.0, 1.0, opts.t_points});
  const int xp = x_points_for(p, opts.x_points, 401, 21);
  for (int i = 0; i < n; ++i) axes.push_back({-cert.R_omega, cert.R_omega, xp});
  const BallBlock ball{1, n, cert.R_omega};
  const auto obj = [&](std::span<const double> z) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = z[1 + i];
    return f(z[0], x);
  };
  return detail::grid_maximize(obj, axes, std::span(&ball, 1)).value;
}

}  // namespace

double find_r0(const ProblemSpec& p, double r_max, int grid_n) {
  if (!(r_max > 0.0) || grid_n < 1) {
    throw Error(ErrorKind::Certificate, "find_r0: r_max must be positive and grid_n >= 1");
  }
  // theta(s) >= s is the condition theta(s)/s >= 1 without the division.
  const auto ok = [&](double s) { return checked(p, p.growth(s), "theta") >= s; };
  const auto node = [&](int i) { return r_max * static_cast<double>(i) / grid_n; };

  if (!ok(r_max)) {
    throw Error(ErrorKind::Certificate,
                fmt::format("growth witness too weak on probe range: theta({})/{} < 1", r_max, r_max));
  }
  int j = grid_n;
  while (j > 1 && ok(node(j - 1))) --j;

  double lo, hi;
  if (j == 1) {
    if (ok(kR0Floor)) return kR0Floor;
    lo = kR0Floor;
    hi = node(1);
  } else {
    lo = node(j - 1);
    hi = node(j);
  }
  // Invariant: !ok(lo), ok(hi).
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return std::max(hi, kR0Floor);
}

Certificate compute_constants(const ProblemSpec& p, const CertificateOptions& opts) {
  Certificate cert;
  cert.problem = p.name;
  cert.structure = p.structure;
  cert.options = opts;
  cert.r0 = find_r0(p, opts.r_max, opts.r_grid);

  int panels = std::max(2, opts.quadrature_panels);
  if (panels % 2 != 0) ++panels;
  const Vector x0 = Vector::Zero(p.dim_x);
  const Vector u0 = Vector::Zero(p.dim_u);
  const double h = 1.0 / panels;
  double simpson = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    simpson += w * lagrangian(p, i * h, x0, u0);
  }
  simpson *= h / 3.0;

  cert.c = cert.r0 + simpson;
  cert.R_omega = p.c_g * cert.c;

  cert.lambda0 = maximize_over_omega(p, cert, opts, [&](double t, const Vector& x) {
    return lagrangian(p, t, x, u0);
  });
  cert.lambda1 = maximize_over_omega(p, cert, opts, [&](double t, const Vector& x) {
    const auto g = p.lagrangian_gradient(t, x, u0);
    return checked(p, g.du.norm(), "grad_u L");
  });
  return cert;
}

double sigma(const ProblemSpec& p, const Certificate& cert, double r,
             const CertificateOptions& opts) {
  if (!(r >= 0.0)) throw Error(ErrorKind::Certificate, "sigma: r must be nonnegative");
  const int n = p.dim_x;
  const int m = p.dim_u;
  const int xp = x_points_for(p, opts.sigma_x_points, 101, 11);
  const int up = r > 0.0 ? u_points_for(p, opts.sigma_u_points) : 1;

  std::vector<Axis> axes;
  axes.push_back({0.0, 1.0, opts.sigma_t_points});
  for (int i = 0; i < n; ++i) axes.push_back({-cert.R_omega, cert.R_omega, xp});
  for (int i = 0; i < m; ++i) axes.push_back({-r, r, up});
  const std::array<BallBlock, 2> balls{BallBlock{1, n, cert.R_omega}, BallBlock{1 + n, m, r}};

  const auto obj = [&](std::span<const double> z) {
    const Unpacked q = unpack(z, n, m);
    const double l = p.lagrangian(q.t, q.x, q.u);
    const auto g = p.lagrangian_gradient(q.t, q.x, q.u);
    return checked(p, g.du.dot(q.u) - l, "sigma integrand");
  };
  return detail::grid_maximize(obj, axes, balls).value;
}

double sigma_inverse(const ProblemSpec& p, const Certificate& cert, double target,
                     const CertificateOptions& opts) {
  const double s0 = sigma(p, cert, 0.0, opts);
  if (target <= s0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (sigma(p, cert, hi, opts) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > opts.sigma_r_max) {
      throw Error(ErrorKind::Certificate,
                  fmt::format("sigma_inverse: no bracket for target {} below r = {}", target,
                              opts.sigma_r_max));
    }
  }
  while (hi - lo > opts.sigma_tol) {
    const double mid = 0.5 * (lo + hi);
    (sigma(p, cert, mid, opts) >= target ? hi : lo) = mid;
  }
  return hi;
}

T0Choice choose_t0(const ProblemSpec& p, const Certificate& cert, const CertificateOptions& opts) {
  const double threshold = p.delta / p.xi;
  if (opts.fixed_t0) {
    const double t0 = *opts.fixed_t0;
    if (!(t0 > 0.0 && t0 < 1.0)) {
      throw Error(ErrorKind::Config, fmt::format("fixed T0 = {} is outside (0, 1)", t0));
    }
    const double beta = sigma(p, cert, (cert.c + 1.0) / t0, opts);
    if (!(beta > threshold)) {
      throw Error(ErrorKind::Certificate,
                  fmt::format("cannot certify: beta = {} <= delta/xi = {} at T0 = {}", beta,
                              threshold, t0));
    }
    return {t0, beta};
  }
  for (int k = 99; k >= 1; --k) {
    const double t0 = k / 100.0;
    const double beta = sigma(p, cert, (cert.c + 1.0) / t0, opts);
    if (beta > threshold + opts.t0_margin) return {t0, beta};
  }
  throw Error(ErrorKind::Certificate, "cannot certify: beta>delta/xi unattainable on T0 grid");
}

double compute_eta(const ProblemSpec& p, double beta, const CertificateOptions& opts) {
  const auto f = [&](double r) { return r / (checked(p, p.growth(r), "theta") + beta); };
  const int n = std::max(opts.eta_points, 16);
  const double log_lo = std::log(1e-6);
  const double log_hi = std::log(opts.eta_r_max);
  std::vector<double> r(n + 1);
  r[0] = 0.0;
  for (int i = 1; i <= n; ++i) r[i] = std::exp(log_lo + (log_hi - log_lo) * (i - 1) / (n - 1));
  r[n] = opts.eta_r_max;

  int best = 0;
  double best_value = f(0.0);
  std::vector<double> values(n + 1);
  for (int i = 0; i <= n; ++i) {
    values[i] = f(r[i]);
    if (values[i] > best_value) {
      best_value = values[i];
      best = i;
    }
  }
  // The supremum must be attained well inside the probe range.
  constexpr int kTail = 8;
  bool decreasing_tail = values[n] < best_value * (1.0 - 1e-9);
  for (int i = n - kTail; i < n && decreasing_tail; ++i) decreasing_tail = values[i + 1] < values[i];
  if (!decreasing_tail || best >= n - kTail) {
    throw Error(ErrorKind::Certificate,
                "eta: r/(theta(r)+beta) not decreasing at the end of the probe range; "
                "theta does not look superlinear");
  }
  const double lo = r[std::max(0, best - 1)];
  const double hi = r[std::min(n, best + 1)];
  const auto m = detail::golden_section_max(f, lo, hi, 1e-13);
  return std::max(best_value, m.value);
}

double compute_gamma(const ProblemSpec& p, double eta, double lambda0, double beta) {
  const double cx = p.c_g * p.xi;
  if (!(cx > 0.0)) throw Error(ErrorKind::Certificate, "gamma requires c_g * xi > 0");
  return (p.c_grad_g + cx) / cx * std::exp(cx * eta * (lambda0 + beta));
}

BoundBranches bound_formula(Theorem theorem, double mu, double xi, double lambda0, double lambda1,
                            double beta, double gamma) {
  BoundBranches b;
  const double scale = theorem == Theorem::Theorem1 ? 1.0 : 1.0 + gamma * xi;
  b.growth = std::sqrt(2.0 / mu * (lambda0 + beta) * scale);
  // Root of mu l^2 - Lambda1 l - Lambda0 = 0 is (...)/(2 mu); the undivided
  // form (...)/2 is kept as a floor, the two agree at mu = 1.
  b.linear = 0.5 * (lambda1 + std::sqrt(lambda1 * lambda1 + 4.0 * mu * lambda0)) / std::min(mu, 1.0);
  return b;
}

Certificate compute_bound(const ProblemSpec& p, Certificate cert, const CertificateOptions& opts) {
  Theorem theorem;
  switch (p.structure) {
    case Structure::Autonomous: theorem = Theorem::Theorem1; break;
    case Structure::TimeVaryingGOnly: theorem = Theorem::Theorem2; break;
    default:
      throw Error(ErrorKind::Certificate, "no theorem applies; certificate refused");
  }
  if (cert.theorem_used) theorem = *cert.theorem_used;

  double gamma = 0.0;
  if (theorem == Theorem::Theorem2) {
    cert.eta = compute_eta(p, cert.beta, opts);
    gamma = compute_gamma(p, *cert.eta, cert.lambda0, cert.beta);
    cert.gamma = gamma;
  } else {
    cert.eta.reset();
    cert.gamma.reset();
  }
  const BoundBranches b =
      bound_formula(theorem, p.mu, p.xi, cert.lambda0, cert.lambda1, cert.beta, gamma);
  if (!std::isfinite(b.ell())) {
    throw Error(ErrorKind::Certificate, "bound overflow: ell is not finite");
  }
  cert.ell_growth_branch = b.growth;
  cert.ell_linear_branch = b.linear;
  cert.ell = b.ell();
  cert.theorem_used = theorem;
  return cert;
}

// ---------------------------------------------------------------------------
// Condition sampling

namespace {

constexpr double kRelTol = 1e-10;

struct Tracker {
  ConditionCheck check;
  bool first = true;

  explicit Tracker(std::string name) { check.name = std::move(name); }

  void observe(double rhs, double lhs, double t, const Vector& x, const Vector& u,
               const Vector& v) {
    const double margin = rhs - lhs;
    const bool ok = margin >= -kRelTol * (1.0 + std::abs(rhs) + std::abs(lhs));
    if (first || margin < check.margin) {
      check.margin = margin;
      check.t = t;
      check.x = x;
      check.u = u;
      check.v = v;
      first = false;
    }
    if (!ok) check.passed = false;
  }
};

void scale_into_ball(Vector& z, double radius) {
  const double n = z.norm();
  if (n > radius && n > 0.0) z *= radius / n;
}

}  // namespace

ConditionReport verify_conditions(const ProblemSpec& p, const VerifyOptions& opts) {
  const int n = p.dim_x;
  const int m = p.dim_u;
  Halton halton(1 + n + 2 * m, opts.seed);

  Tracker c1("C1"), c2("C2"), c3("C3"), c4("C4");
  const Vector zero_u = Vector::Zero(m);

  for (int s = 0; s < opts.samples; ++s) {
    const auto h = halton.next();
    const double t = h[0];
    Vector x(n), u(m), v(m);
    for (int i = 0; i < n; ++i) x[i] = opts.x_radius * (2.0 * h[1 + i] - 1.0);
    for (int i = 0; i < m; ++i) u[i] = opts.u_cap * (2.0 * h[1 + n + i] - 1.0);
    for (int i = 0; i < m; ++i) v[i] = opts.u_cap * (2.0 * h[1 + n + m + i] - 1.0);
    scale_into_ball(x, opts.x_radius);
    scale_into_ball(u, opts.u_cap);
    scale_into_ball(v, opts.u_cap);

    const Matrix g = control_matrix(p, t, x);
    for (const Vector* w : std::array<const Vector*, 2>{&u, &zero_u}) {
      const Evaluation e = evaluate(p, t, x, *w);
      const double theta = checked(p, p.growth(w->norm()), "theta");
      // L >= theta(|u|) > 0
      c1.observe(e.cost_density, theta, t, x, *w, *w);
      c1.observe(theta, 0.0, t, x, *w, *w);
      if (theta <= 0.0) c1.check.passed = false;

      Vector dtx(1 + n);
      dtx[0] = e.lagrangian_gradient.dt;
      dtx.tail(n) = e.lagrangian_gradient.dx;
      c3.observe(p.xi * e.cost_density + p.delta, dtx.norm() * e.velocity.norm(), t, x, *w, *w);
    }

    // Two-point strong convexity inequality.
    const Evaluation eu = evaluate(p, t, x, u);
    const double lv = lagrangian(p, t, x, v);
    const double lhs =
        eu.cost_density + eu.lagrangian_gradient.du.dot(v - u) + 0.5 * p.mu * (v - u).squaredNorm();
    c2.observe(lv, lhs, t, x, u, v);

    c4.observe(p.c_g, operator_norm(g), t, x, u, u);
    c4.observe(p.c_grad_g, gradient_norm(p.control_matrix_gradient(t, x)), t, x, u, u);
  }

  ConditionReport report;
  report.samples = opts.samples;
  report.u_cap = opts.u_cap;
  report.x_radius = opts.x_radius;
  report.checks = {c1.check, c2.check, c3.check, c4.check};
  return report;
}

Theorem resolve_theorem(const ProblemSpec& p, TheoremSelector selector) {
  switch (selector) {
    case TheoremSelector::Auto:
      if (p.structure == Structure::Autonomous) return Theorem::Theorem1;
      if (p.structure == Structure::TimeVaryingGOnly) return Theorem::Theorem2;
      throw Error(ErrorKind::Certificate, "no theorem applies; certificate refused");
    case TheoremSelector::Force1:
      if (p.structure != Structure::Autonomous) {
        throw Error(ErrorKind::Config,
                    fmt::format("force-1 requires an autonomous problem; '{}' is {}", p.name,
                                to_string(p.structure)));
      }
      return Theorem::Theorem1;
    case TheoremSelector::Force2:
      if (p.structure != Structure::TimeVaryingGOnly) {
        throw Error(ErrorKind::Config,
                    fmt::format("force-2 requires g = g(t) structure; '{}' is {}", p.name,
                                to_string(p.structure)));
      }
      return Theorem::Theorem2;
  }
  throw Error(ErrorKind::Config, "bad theorem selector");
}

Certificate certify(const ProblemSpec& p, const CertificateOptions& opts,
                    TheoremSelector selector) {
  const Theorem theorem = resolve_theorem(p, selector);
  Certificate cert = compute_constants(p, opts);
  cert.conditions = verify_conditions(
      p, VerifyOptions{opts.samples, opts.u_cap, cert.R_omega, opts.seed});
  const T0Choice choice = choose_t0(p, cert, opts);
  cert.T0 = choice.T0;
  cert.beta = choice.beta;
  cert.theorem_used = theorem;
  return compute_bound(p, std::move(cert), opts);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json vec_json(const Vector& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

nlohmann::json to_json(const ConditionReport& report) {
  nlohmann::json j;
  j["samples"] = report.samples;
  j["u_cap"] = report.u_cap;
  j["x_radius"] = report.x_radius;
  j["all_passed"] = report.all_passed();
  auto checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"margin", c.margin},
                      {"worst_sample", {{"t", c.t}, {"x", vec_json(c.x)}, {"u", vec_json(c.u)},
                                        {"v", vec_json(c.v)}}}});
  }
  j["checks"] = checks;
  return j;
}

nlohmann::json to_json(const Certificate& cert) {
  nlohmann::json j;
  j["problem"] = cert.problem;
  j["structure"] = to_string(cert.structure);
  j["theorem_used"] = cert.theorem_used ? to_string(*cert.theorem_used) : "none";
  j["constants"] = {{"r0", cert.r0},         {"c", cert.c},       {"R_omega", cert.R_omega},
                    {"lambda0", cert.lambda0}, {"lambda1", cert.lambda1}, {"T0", cert.T0},
                    {"beta", cert.beta}};
  j["constants"]["eta"] = cert.eta ? nlohmann::json(*cert.eta) : nlohmann::json(nullptr);
  j["constants"]["gamma"] = cert.gamma ? nlohmann::json(*cert.gamma) : nlohmann::json(nullptr);
  j["bound"] = {{"ell", cert.ell},
                {"growth_branch", cert.ell_growth_branch},
                {"linear_branch", cert.ell_linear_branch}};
  const auto& o = cert.options;
  j["grids"] = {{"r_max", o.r_max},
                {"r_grid", o.r_grid},
                {"quadrature_panels", o.quadrature_panels},
                {"t_points", o.t_points},
                {"x_points", o.x_points},
                {"sigma_t_points", o.sigma_t_points},
                {"sigma_x_points", o.sigma_x_points},
                {"sigma_u_points", o.sigma_u_points},
                {"sigma_tol", o.sigma_tol},
                {"t0_policy", o.fixed_t0 ? "fixed" : "largest-admissible-on-0.01-grid"},
                {"eta_points", o.eta_points},
                {"eta_r_max", o.eta_r_max},
                {"seed", o.seed}};
  j["verification"] = "numerical (grid + golden-section refinement), not interval-verified";
  j["conditions"] = to_json(cert.conditions);
  return j;
}

Certificate certificate_from_json(const nlohmann::json& j) {
  try {
    Certificate cert;
    cert.problem = j.at("problem").get<std::string>();
    const auto structure = j.at("structure").get<std::string>();
    cert.structure = structure == "autonomous"            ? Structure::Autonomous
                     : structure == "time-varying-g-only" ? Structure::TimeVaryingGOnly
                                                          : Structure::General;
    const auto theorem = j.at("theorem_used").get<std::string>();
    if (theorem == "Theorem1") cert.theorem_used = Theorem::Theorem1;
    if (theorem == "Theorem2") cert.theorem_used = Theorem::Theorem2;
    const auto& k = j.at("constants");
    cert.r0 = k.at("r0").get<double>();
    cert.c = k.at("c").get<double>();
    cert.R_omega = k.at("R_omega").get<double>();
    cert.lambda0 = k.at("lambda0").get<double>();
    cert.lambda1 = k.at("lambda1").get<double>();
    cert.T0 = k.at("T0").get<double>();
    cert.beta = k.at("beta").get<double>();
    if (!k.at("eta").is_null()) cert.eta = k.at("eta").get<double>();
    if (!k.at("gamma").is_null()) cert.gamma = k.at("gamma").get<double>();
    const auto& b = j.at("bound");
    cert.ell = b.at("ell").get<double>();
    cert.ell_growth_branch = b.at("growth_branch").get<double>();
    cert.ell_linear_branch = b.at("linear_branch").get<double>();
    return cert;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, fmt::format("malformed certificate JSON: {}", e.what()));
  }
}

}  // namespace apriori
