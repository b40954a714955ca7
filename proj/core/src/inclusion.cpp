// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include "apriori/inclusion.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "apriori/sampling.hpp"
#include "search.hpp"

namespace apriori {

InclusionVelocity inclusion_velocity(const ProblemSpec& p, double beta, double t, const Vector& y,
                                     double rho, const Vector& w) {
  const double denom = lagrangian(p, t, y, w) + beta;
  return {rho / denom, rho * (control_matrix(p, t, y) * w) / denom};
}

namespace {

std::vector<Vector> unit_rays(int m, int count) {
  std::vector<Vector> rays;
  for (int i = 0; i < m; ++i) {
    rays.push_back(Vector::Unit(m, i));
    rays.push_back(-Vector::Unit(m, i));
  }
  if (m == 1) return rays;
  if (m == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * M_PI * k / count;
      Vector r(2);
      r << std::cos(a), std::sin(a);
      rays.push_back(r);
    }
    return rays;
  }
  Halton h(m, 0);
  while (static_cast<int>(rays.size()) < count + 2 * m) {
    const auto z = h.next();
    Vector r(m);
    for (int i = 0; i < m; ++i) r[i] = 2.0 * z[i] - 1.0;
    const double n = r.norm();
    if (n > 1e-3 && n <= 1.0) rays.push_back(r / n);
  }
  return rays;
}

}  // namespace

InclusionProbe support_function(const ProblemSpec& p, double beta, double t, const Vector& y,
                                const Vector& direction, const SupportOptions& opts) {
  const int n = p.dim_x;
  const int m = p.dim_u;
  if (direction.size() != 1 + n) {
    throw Error(ErrorKind::Dimension, fmt::format("direction must live in R^{}", 1 + n));
  }
  const Matrix g = control_matrix(p, t, y);
  const double d0 = direction[0];
  const Vector gtd = g.transpose() * direction.tail(n);
  // rho = 1 branch: (d0 + <d_v, g w>) / (L + beta)
  const auto phi = [&](const Vector& w) { return (d0 + gtd.dot(w)) / (lagrangian(p, t, y, w) + beta); };

  double best = -std::numeric_limits<double>::infinity();
  Vector best_w = Vector::Zero(m);
  const Vector zero = Vector::Zero(m);
  best = phi(zero);

  const auto rays = unit_rays(m, opts.rays);
  const int R = std::max(3, opts.radial_points);
  const auto radius = [&](int j) {
    const double s = static_cast<double>(j) / (R - 1);
    return opts.r_max * s * s;
  };
  int best_ray = -1, best_j = 0;
  for (int k = 0; k < static_cast<int>(rays.size()); ++k) {
    for (int j = 1; j < R; ++j) {
      const double v = phi(radius(j) * rays[k]);
      if (v > best) {
        best = v;
        best_ray = k;
        best_j = j;
      }
    }
  }
  if (best_ray >= 0) {
    const Vector& ray = rays[best_ray];
    const auto along = [&](double r) { return phi(r * ray); };
    const auto mx = detail::golden_section_max(along, radius(best_j - 1),
                                               radius(std::min(R - 1, best_j + 1)), 1e-12);
    best_w = mx.value > best ? Vector(mx.x * ray) : Vector(radius(best_j) * ray);
    best = std::max(best, mx.value);
  } else {
    // w = 0 on the rho = 1 branch; refine along every ray's first cell.
    for (const auto& ray : rays) {
      const auto along = [&](double r) { return phi(r * ray); };
      const auto mx = detail::golden_section_max(along, 0.0, radius(1), 1e-12);
      if (mx.value > best) {
        best = mx.value;
        best_w = mx.x * ray;
      }
    }
  }

  InclusionProbe probe;
  probe.t = t;
  probe.y = y;
  probe.direction = direction;
  if (best > 0.0) {
    probe.support_value = best;
    probe.argmax_rho = 1.0;
    probe.argmax_w = best_w;
  } else {
    probe.support_value = 0.0;
    probe.argmax_rho = 0.0;
    probe.argmax_w = Vector::Zero(m);
  }
  probe.argmax_velocity = inclusion_velocity(p, beta, t, y, probe.argmax_rho, probe.argmax_w);
  return probe;
}

VelocityBound check_velocity_bound(const ProblemSpec& p, double beta, const Vector& w,
                                   const InclusionVelocity& vel) {
  const double r = w.norm();
  const double denom = p.growth(r) + beta;
  VelocityBound b;
  b.v0_ratio = std::abs(vel.v0) * denom;
  const double v_norm = vel.v.norm();
  const double v_limit = p.c_g * r / denom;
  b.v_ratio = v_limit > 0.0 ? v_norm / v_limit : (v_norm > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  constexpr double kTol = 1e-12;
  b.passed = b.v0_ratio <= 1.0 + kTol && b.v_ratio <= 1.0 + kTol;
  return b;
}

LipschitzReport lipschitz_probe(const ProblemSpec& p, double beta, double eta,
                                const std::vector<PointPair>& pairs, const LipschitzOptions& opts) {
  const int m = p.dim_u;
  std::vector<Vector> panel;
  if (m == 1) {
    const int k = std::max(2, opts.w_points);
    for (int i = 0; i < k; ++i) panel.push_back(Vector::Constant(1, -opts.w_max + 2.0 * opts.w_max * i / (k - 1)));
  } else {
    Halton h(m, 0);
    panel.push_back(Vector::Zero(m));
    while (static_cast<int>(panel.size()) < opts.w_points) {
      const auto z = h.next();
      Vector w(m);
      for (int i = 0; i < m; ++i) w[i] = opts.w_max * (2.0 * z[i] - 1.0);
      if (w.norm() <= opts.w_max) panel.push_back(w);
    }
  }

  LipschitzReport rep;
  rep.pairs = static_cast<int>(pairs.size());
  rep.panel_size = static_cast<int>(panel.size());
  rep.v0_constant = p.xi / beta;
  rep.v_constant = p.c_grad_g / beta + eta * p.xi * p.c_g;

  const auto ratio = [](double diff, double limit) {
    if (diff == 0.0) return 0.0;
    return limit > 0.0 ? diff / limit : std::numeric_limits<double>::infinity();
  };

  for (int k = 0; k < rep.pairs; ++k) {
    const auto& pr = pairs[k];
    const double dist = std::abs(pr.t1 - pr.t2) + (pr.y1 - pr.y2).norm();
    for (const auto& w : panel) {
      const auto a = inclusion_velocity(p, beta, pr.t1, pr.y1, 1.0, w);
      const auto b = inclusion_velocity(p, beta, pr.t2, pr.y2, 1.0, w);
      const double r0 = ratio(std::abs(a.v0 - b.v0), rep.v0_constant * dist);
      const double r1 = ratio((a.v - b.v).norm(), rep.v_constant * dist);
      if (r0 > rep.worst_v0_ratio) {
        rep.worst_v0_ratio = r0;
        rep.worst_v0_pair = k;
      }
      if (r1 > rep.worst_v_ratio) {
        rep.worst_v_ratio = r1;
        rep.worst_v_pair = k;
      }
    }
  }
  rep.passed = rep.worst_v0_ratio <= 1.0 + opts.tol && rep.worst_v_ratio <= 1.0 + opts.tol;
  return rep;
}

}  // namespace apriori
