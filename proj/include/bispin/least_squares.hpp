// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <functional>

namespace bispin {

/// residuals(x, r) fills r (size fixed at construction) for parameters x.
using ResidualFunction = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LeastSquaresOptions {
  double ftol = 1e-12;   // relative SSE change
  double xtol = 1e-12;
  int max_evaluations = 2000;
};

struct LeastSquaresResult {
  Eigen::VectorXd x;
  double sse = 0;
  int evaluations = 0;
  bool converged = false;
  Eigen::MatrixXd jacobian;  // central differences at x
};

/// Levenberg-Marquardt with a central-difference Jacobian.
LeastSquaresResult least_squares(const ResidualFunction& residuals, Eigen::Index n_residuals,
                                 const Eigen::VectorXd& x0,
                                 const LeastSquaresOptions& options = {});

/// Ratio of the smallest to the largest singular value of J.
double conditioning(const Eigen::MatrixXd& jacobian);

}  // namespace bispin
