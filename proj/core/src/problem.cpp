// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include "apriori/problem.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <set>

namespace apriori {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Evaluation: return "evaluation";
    case ErrorKind::Registry: return "registry";
    case ErrorKind::Certificate: return "certificate";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Reparam: return "reparam";
    case ErrorKind::Adjoint: return "adjoint";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

const char* to_string(Structure s) {
  switch (s) {
    case Structure::Autonomous: return "autonomous";
    case Structure::TimeVaryingGOnly: return "time-varying-g-only";
    case Structure::General: return "general";
  }
  return "unknown";
}

namespace {

void check_dims(const ProblemSpec& p, const Vector& x, const Vector& u) {
  if (x.size() != p.dim_x || u.size() != p.dim_u) {
    throw Error(ErrorKind::Dimension,
                fmt::format("{}: expected x in R^{} and u in R^{}, got R^{} and R^{}",
                            p.name, p.dim_x, p.dim_u, x.size(), u.size()));
  }
}

std::string where(double t, const Vector& x, const Vector& u) {
  std::string s = fmt::format("t={:.17g}", t);
  for (Eigen::Index i = 0; i < x.size(); ++i) s += fmt::format(" x{}={:.17g}", i + 1, x[i]);
  for (Eigen::Index i = 0; i < u.size(); ++i) s += fmt::format(" u{}={:.17g}", i + 1, u[i]);
  return s;
}

[[noreturn]] void evaluation_failure(const ProblemSpec& p, const char* what, double t,
                                     const Vector& x, const Vector& u) {
  throw Error(ErrorKind::Evaluation, fmt::format("problem evaluation failure in {} ({}) at {}",
                                                 what, p.name, where(t, x, u)));
}

bool finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

double lagrangian(const ProblemSpec& p, double t, const Vector& x, const Vector& u) {
  check_dims(p, x, u);
  const double value = p.lagrangian(t, x, u);
  if (!std::isfinite(value)) evaluation_failure(p, "L", t, x, u);
  return value;
}

Matrix control_matrix(const ProblemSpec& p, double t, const Vector& x) {
  Matrix g = p.control_matrix(t, x);
  if (g.rows() != p.dim_x || g.cols() != p.dim_u) {
    throw Error(ErrorKind::Dimension, fmt::format("{}: g returned {}x{}, expected {}x{}", p.name,
                                                  g.rows(), g.cols(), p.dim_x, p.dim_u));
  }
  if (!finite(g)) evaluation_failure(p, "g", t, x, Vector::Zero(p.dim_u));
  return g;
}

Evaluation evaluate(const ProblemSpec& p, double t, const Vector& x, const Vector& u) {
  check_dims(p, x, u);
  Evaluation e;
  e.cost_density = lagrangian(p, t, x, u);
  const Matrix g = control_matrix(p, t, x);
  e.velocity = g * u;

  e.lagrangian_gradient = p.lagrangian_gradient(t, x, u);
  const auto& dl = e.lagrangian_gradient;
  if (dl.dx.size() != p.dim_x || dl.du.size() != p.dim_u) {
    throw Error(ErrorKind::Dimension, fmt::format("{}: grad L has wrong shape", p.name));
  }
  if (!std::isfinite(dl.dt) || !finite(dl.dx) || !finite(dl.du)) {
    evaluation_failure(p, "grad L", t, x, u);
  }

  e.control_matrix_gradient = p.control_matrix_gradient(t, x);
  const auto& dg = e.control_matrix_gradient;
  if (dg.dx.size() != static_cast<std::size_t>(p.dim_x)) {
    throw Error(ErrorKind::Dimension, fmt::format("{}: grad g has wrong shape", p.name));
  }
  if (!finite(dg.dt)) evaluation_failure(p, "grad g", t, x, u);
  for (const auto& m : dg.dx) {
    if (!finite(m)) evaluation_failure(p, "grad g", t, x, u);
  }
  return e;
}

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 || a.cols() == 1) return a.norm();
  const Matrix ata = a.transpose() * a;
  Vector v = Vector::Ones(ata.cols()) / std::sqrt(static_cast<double>(ata.cols()));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector w = ata * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (std::abs(nw - lambda) <= 1e-15 * nw) {
      lambda = nw;
      break;
    }
    lambda = nw;
  }
  return std::sqrt(lambda);
}

double gradient_norm(const ControlMatrixGradient& dg) {
  double s = operator_norm(dg.dt);
  s *= s;
  for (const auto& m : dg.dx) {
    const double k = operator_norm(m);
    s += k * k;
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Registry

namespace {

using std::numbers::pi;

Vector scalar(double v) { return Vector::Constant(1, v); }
Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }

ControlMatrixGradient constant_g_gradient() {
  return {scalar_matrix(0.0), {scalar_matrix(0.0)}};
}

struct Entry {
  ParameterMap defaults;
  ProblemSpec (*build)(const ParameterMap&);
};

void apply_constants(ProblemSpec& p, const ParameterMap& params) {
  p.mu = params.at("mu");
  p.xi = params.at("xi");
  p.delta = params.at("delta");
  p.c_g = params.at("c_g");
  p.c_grad_g = params.at("c_grad_g");
  p.parameters = params;
}

ProblemSpec build_toy(const ParameterMap& params) {
  const double a = params.at("offset");
  ProblemSpec p;
  p.name = "toy-quadratic";
  p.lagrangian = [a](double, const Vector&, const Vector& u) { return a + 0.5 * u.squaredNorm(); };
  p.lagrangian_gradient = [](double, const Vector& x, const Vector& u) {
    return LagrangianGradient{0.0, Vector::Zero(x.size()), u};
  };
  p.control_matrix = [](double, const Vector&) { return scalar_matrix(1.0); };
  p.control_matrix_gradient = [](double, const Vector&) { return constant_g_gradient(); };
  p.growth = [a](double r) { return a + 0.5 * r * r; };
  p.structure = Structure::Autonomous;
  apply_constants(p, params);
  return p;
}

ProblemSpec build_lq(const ParameterMap& params) {
  const double a = params.at("offset");
  const double target = params.at("target");
  ProblemSpec p;
  p.name = "lq-tracking";
  p.lagrangian = [a, target](double, const Vector& x, const Vector& u) {
    const double e = x[0] - target;
    return a + 0.5 * u.squaredNorm() + 0.5 * e * e;
  };
  p.lagrangian_gradient = [target](double, const Vector& x, const Vector& u) {
    return LagrangianGradient{0.0, scalar(x[0] - target), u};
  };
  p.control_matrix = [](double, const Vector&) { return scalar_matrix(1.0); };
  p.control_matrix_gradient = [](double, const Vector&) { return constant_g_gradient(); };
  p.growth = [a](double r) { return a + 0.5 * r * r; };
  p.structure = Structure::Autonomous;
  apply_constants(p, params);
  return p;
}

ProblemSpec build_sin_well(const ParameterMap& params) {
  const double a = params.at("offset");
  ProblemSpec p;
  p.name = "sin-well";
  p.lagrangian = [a](double, const Vector& x, const Vector& u) {
    return a + 0.5 * u.squaredNorm() + std::sin(x[0]);
  };
  p.lagrangian_gradient = [](double, const Vector& x, const Vector& u) {
    return LagrangianGradient{0.0, scalar(std::cos(x[0])), u};
  };
  p.control_matrix = [](double, const Vector&) { return scalar_matrix(1.0); };
  p.control_matrix_gradient = [](double, const Vector&) { return constant_g_gradient(); };
  p.growth = [a](double r) { return a - 1.0 + 0.5 * r * r; };
  p.structure = Structure::Autonomous;
  apply_constants(p, params);
  return p;
}

ProblemSpec build_lq_tv(const ParameterMap& params) {
  const double a = params.at("offset");
  const double target = params.at("target");
  const double amp = params.at("amplitude");
  ProblemSpec p;
  p.name = "lq-tv";
  p.lagrangian = [a, target](double, const Vector& x, const Vector& u) {
    const double e = x[0] - target;
    return a + 0.5 * u.squaredNorm() + 0.5 * e * e;
  };
  p.lagrangian_gradient = [target](double, const Vector& x, const Vector& u) {
    return LagrangianGradient{0.0, scalar(x[0] - target), u};
  };
  p.control_matrix = [amp](double t, const Vector&) {
    return scalar_matrix(1.0 + amp * std::sin(2.0 * pi * t));
  };
  p.control_matrix_gradient = [amp](double t, const Vector&) {
    return ControlMatrixGradient{scalar_matrix(2.0 * pi * amp * std::cos(2.0 * pi * t)),
                                 {scalar_matrix(0.0)}};
  };
  p.growth = [a](double r) { return a + 0.5 * r * r; };
  p.structure = Structure::TimeVaryingGOnly;
  apply_constants(p, params);
  return p;
}

const std::map<std::string, Entry, std::less<>>& registry() {
  static const std::map<std::string, Entry, std::less<>> entries = {
      {"toy-quadratic",
       {{{"offset", 1.0}, {"mu", 1.0}, {"xi", 1.0}, {"delta", 0.1}, {"c_g", 1.0},
         {"c_grad_g", 0.0}},
        &build_toy}},
      {"lq-tracking",
       {{{"offset", 0.1}, {"target", 1.0}, {"mu", 1.0}, {"xi", 1.0}, {"delta", 0.1},
         {"c_g", 1.0}, {"c_grad_g", 0.0}},
        &build_lq}},
      {"sin-well",
       {{{"offset", 2.0}, {"mu", 1.0}, {"xi", 1.0}, {"delta", 0.1}, {"c_g", 1.0},
         {"c_grad_g", 0.0}},
        &build_sin_well}},
      // c_g and c_grad_g are derived from the amplitude unless overridden.
      {"lq-tv",
       {{{"offset", 0.1}, {"target", 1.0}, {"amplitude", 0.5}, {"mu", 1.0}, {"xi", 2.0},
         {"delta", 0.5}},
        &build_lq_tv}},
  };
  return entries;
}

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& [name, entry] : registry()) names.push_back(name);
  return names;
}

ProblemSpec builtin(std::string_view name, const ParameterMap& overrides) {
  const auto& reg = registry();
  const auto it = reg.find(name);
  if (it == reg.end()) {
    throw Error(ErrorKind::Registry, fmt::format("unknown problem '{}'; available: {}", name,
                                                 fmt::join(builtin_names(), ", ")));
  }
  ParameterMap params = it->second.defaults;
  std::set<std::string> allowed;
  for (const auto& [k, v] : params) allowed.insert(k);
  if (name == "lq-tv") allowed.insert({"c_g", "c_grad_g"});
  for (const auto& [k, v] : overrides) {
    if (!allowed.contains(k)) {
      throw Error(ErrorKind::Registry, fmt::format("problem '{}' has no parameter '{}'; valid: {}",
                                                   name, k, fmt::join(allowed, ", ")));
    }
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::Registry, fmt::format("parameter '{}' must be finite", k));
    }
    params[k] = v;
  }
  if (name == "lq-tv") {
    const double amp = params.at("amplitude");
    params.try_emplace("c_g", 1.0 + std::abs(amp));
    params.try_emplace("c_grad_g", 2.0 * pi * std::abs(amp));
  }
  return it->second.build(params);
}

}  // namespace apriori
