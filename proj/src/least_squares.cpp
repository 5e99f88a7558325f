// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#include "bispin/least_squares.hpp"

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <cmath>

namespace bispin {

namespace {

struct Functor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const ResidualFunction* fn;
  Eigen::Index n_in;
  Eigen::Index n_out;

  Eigen::Index inputs() const { return n_in; }
  Eigen::Index values() const { return n_out; }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    r.resize(n_out);
    (*fn)(x, r);
    return r.allFinite() ? 0 : -1;
  }
};

}  // namespace

LeastSquaresResult least_squares(const ResidualFunction& residuals, Eigen::Index n_residuals,
                                 const Eigen::VectorXd& x0, const LeastSquaresOptions& options) {
  Functor base{&residuals, x0.size(), n_residuals};
  Eigen::NumericalDiff<Functor, Eigen::Central> diff(base);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor, Eigen::Central>> lm(diff);
  lm.parameters.ftol = options.ftol;
  lm.parameters.xtol = options.xtol;
  lm.parameters.maxfev = options.max_evaluations;

  Eigen::VectorXd x = x0;
  const auto status = lm.minimize(x);
  Eigen::VectorXd r(n_residuals);
  residuals(x, r);
  const double sse = r.squaredNorm();

  LeastSquaresResult out;
  out.x = x;
  out.evaluations = static_cast<int>(lm.nfev);
  out.converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::GtolTooSmall;
  out.sse = sse;
  out.jacobian.resize(n_residuals, x.size());
  diff.df(x, out.jacobian);
  return out;
}

double conditioning(const Eigen::MatrixXd& jacobian) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

}  // namespace bispin
