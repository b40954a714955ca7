// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include "search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace apriori::detail {

ScalarMax golden_section_max(const std::function<double(double)>& f, double a, double b,
                             double tol, int max_iter) {
  if (b < a) std::swap(a, b);
  ScalarMax best{a, f(a)};
  if (b == a) return best;
  const double fb = f(b);
  if (fb > best.value) best = {b, fb};

  constexpr double inv_phi = 0.6180339887498949;
  double lo = a, hi = b;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter && (hi - lo) > tol * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  if (f1 > best.value) best = {x1, f1};
  if (f2 > best.value) best = {x2, f2};
  return best;
}

namespace {

bool inside_balls(std::span<const double> z, std::span<const BallBlock> balls) {
  for (const auto& b : balls) {
    double s = 0.0;
    for (int k = b.first; k < b.first + b.count; ++k) s += z[k] * z[k];
    if (s > b.radius * b.radius * (1.0 + 1e-12)) return false;
  }
  return true;
}

// Feasible interval for coordinate k with the others frozen.
std::pair<double, double> chord(std::span<const double> z, int k, const Axis& axis,
                                std::span<const BallBlock> balls) {
  double lo = axis.lo, hi = axis.hi;
  for (const auto& b : balls) {
    if (k < b.first || k >= b.first + b.count) continue;
    double rest = 0.0;
    for (int j = b.first; j < b.first + b.count; ++j) {
      if (j != k) rest += z[j] * z[j];
    }
    const double half = std::sqrt(std::max(0.0, b.radius * b.radius - rest));
    lo = std::max(lo, -half);
    hi = std::min(hi, half);
  }
  return {lo, hi};
}

}  // namespace

SearchResult grid_maximize(const Objective& f, std::span<const Axis> axes,
                           std::span<const BallBlock> balls, bool refine) {
  const std::size_t dim = axes.size();
  std::vector<int> index(dim, 0);
  std::vector<double> z(dim);
  SearchResult best{-std::numeric_limits<double>::infinity(), std::vector<double>(dim)};
  std::vector<int> best_index(dim, 0);

  for (;;) {
    for (std::size_t k = 0; k < dim; ++k) z[k] = axes[k].node(index[k]);
    if (inside_balls(z, balls)) {
      const double v = f(z);
      if (v > best.value) {
        best.value = v;
        best.argmax = z;
        best_index = index;
      }
    }
    std::size_t k = 0;
    for (; k < dim; ++k) {
      if (++index[k] < axes[k].points) break;
      index[k] = 0;
    }
    if (k == dim) break;
  }

  if (!refine || !std::isfinite(best.value)) return best;

  z = best.argmax;
  for (std::size_t k = 0; k < dim; ++k) {
    const Axis& axis = axes[k];
    if (axis.points <= 1 || axis.hi <= axis.lo) continue;
    const double h = axis.spacing();
    auto [lo, hi] = chord(z, static_cast<int>(k), axis, balls);
    lo = std::max(lo, z[k] - h);
    hi = std::min(hi, z[k] + h);
    if (!(hi > lo)) continue;
    std::vector<double> probe = z;
    const auto along = [&](double s) {
      probe[k] = s;
      return f(probe);
    };
    const ScalarMax m = golden_section_max(along, lo, hi);
    if (m.value > best.value) {
      best.value = m.value;
      z[k] = m.x;
      best.argmax = z;
    }
  }
  return best;
}

}  // namespace apriori::detail
