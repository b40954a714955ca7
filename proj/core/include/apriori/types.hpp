// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace apriori {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorKind {
  Dimension,
  Evaluation,
  Registry,
  Certificate,
  Solver,
  Reparam,
  Adjoint,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

/// Library failure tagged with the stage it came from.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace apriori
