// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace apriori {

/// Halton low-discrepancy sequence; the seed shifts the starting index.
class Halton {
 public:
  explicit Halton(int dim, std::uint64_t seed = 0) : dim_(dim), index_(seed + 1) {
    if (dim < 1 || dim > static_cast<int>(kPrimes.size())) {
      throw std::invalid_argument("Halton: dimension out of range");
    }
  }

  int dim() const { return dim_; }

  /// Next point in [0, 1)^dim.
  std::vector<double> next() {
    std::vector<double> point(dim_);
    for (int d = 0; d < dim_; ++d) point[d] = radical_inverse(index_, kPrimes[d]);
    ++index_;
    return point;
  }

  static double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (i > 0) {
      r += f * static_cast<double>(i % base);
      i /= base;
      f *= inv;
    }
    return r;
  }

 private:
  static constexpr std::array<std::uint64_t, 24> kPrimes = {
      2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
  int dim_;
  std::uint64_t index_;
};

}  // namespace apriori
