#pragma once

#include <Eigen/Dense>

#include "scfcq/errors.hpp"

namespace scfcq {

enum class BasisKind { Polynomial, CubicBspline };

// Series basis P_J(.) on a closed interval. For polynomials order_param is
// the degree J_p (dimension J = J_p + 1); for cubic B-splines it is the
// inner-knot count J_k (dimension J = J_k + 4) on an open-uniform knot
// vector with full clamping at both ends.
struct BasisSpec {
  BasisKind kind = BasisKind::Polynomial;
  int order_param = 3;
  double lo = 0.0;
  double hi = 1.0;

  long dimension() const {
    return kind == BasisKind::Polynomial ? order_param + 1 : order_param + 4;
  }
};

// Basis values at a single point. Throws OutOfSupport when v falls outside
// [lo, hi] by more than numeric slack; values inside the slack are clamped.
Eigen::VectorXd eval_basis(double v, const BasisSpec& spec);

// Row i = eval_basis(values[i], spec). OutOfSupport reports the offending row.
Eigen::MatrixXd build_design(const Eigen::VectorXd& values, const BasisSpec& spec);

}  // namespace scfcq
