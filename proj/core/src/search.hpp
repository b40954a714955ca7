// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

namespace apriori::detail {

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  int points = 1;

  double spacing() const { return points > 1 ? (hi - lo) / (points - 1) : 0.0; }
  double node(int i) const { return points > 1 ? lo + (hi - lo) * i / (points - 1) : 0.5 * (lo + hi); }
};

/// Consecutive axes [first, first + count) whose coordinates must stay in a
/// Euclidean ball of the given radius.
struct BallBlock {
  int first = 0;
  int count = 0;
  double radius = 0.0;
};

struct SearchResult {
  double value = 0.0;
  std::vector<double> argmax;
};

using Objective = std::function<double(std::span<const double>)>;

struct ScalarMax {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for a maximum on [a, b], endpoints included.
ScalarMax golden_section_max(const std::function<double(double)>& f, double a, double b,
                             double tol = 1e-11, int max_iter = 200);

/// Tensor grid maximization followed by one coordinate-wise golden-section
/// pass around the best grid node. Fixed sweep order.
SearchResult grid_maximize(const Objective& f, std::span<const Axis> axes,
                           std::span<const BallBlock> balls, bool refine = true);

}  // namespace apriori::detail
