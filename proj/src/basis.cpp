#include "scfcq/basis.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace scfcq {

namespace {

// Cubic B-spline values on a clamped knot vector with equally spaced inner
// knots; standard Cox-de Boor recursion over all J = n_inner + 4 functions.
Eigen::VectorXd bspline_row(double v, int n_inner, double lo, double hi) {
  const int degree = 3;
  const long J = n_inner + 4;
  const long n_knots = J + degree + 1;

  std::vector<double> t(n_knots);
  for (long k = 0; k <= degree; ++k) t[k] = lo;
  for (long k = 1; k <= n_inner; ++k)
    t[degree + k] = lo + (hi - lo) * static_cast<double>(k) /
                             static_cast<double>(n_inner + 1);
  for (long k = 0; k <= degree; ++k) t[n_knots - 1 - k] = hi;

  Eigen::VectorXd out = Eigen::VectorXd::Zero(J);
  if (v >= hi) {
    out(J - 1) = 1.0;  // right-closed endpoint
    return out;
  }

  // Degree-0 seed: half-open spans [t_k, t_{k+1}).
  std::vector<double> N(n_knots - 1, 0.0);
  for (long k = 0; k + 1 < n_knots; ++k)
    if (v >= t[k] && v < t[k + 1]) N[k] = 1.0;

  for (int d = 1; d <= degree; ++d) {
    for (long k = 0; k + d + 1 < n_knots; ++k) {
      double left = 0.0, right = 0.0;
      if (t[k + d] > t[k]) left = (v - t[k]) / (t[k + d] - t[k]) * N[k];
      if (t[k + d + 1] > t[k + 1])
        right = (t[k + d + 1] - v) / (t[k + d + 1] - t[k + 1]) * N[k + 1];
      N[k] = left + right;
    }
  }
  for (long k = 0; k < J; ++k) out(k) = N[k];
  return out;
}

}  // namespace

Eigen::VectorXd eval_basis(double v, const BasisSpec& spec) {
  const double slack = 1e-9 * (spec.hi - spec.lo) + 1e-12;
  if (v < spec.lo - slack || v > spec.hi + slack)
    throw OutOfSupport(v, spec.lo, spec.hi);
  v = std::clamp(v, spec.lo, spec.hi);

  if (spec.kind == BasisKind::Polynomial) {
    Eigen::VectorXd out(spec.dimension());
    double pw = 1.0;
    for (long j = 0; j < out.size(); ++j) {
      out(j) = pw;
      pw *= v;
    }
    return out;
  }
  return bspline_row(v, spec.order_param, spec.lo, spec.hi);
}

Eigen::MatrixXd build_design(const Eigen::VectorXd& values, const BasisSpec& spec) {
  Eigen::MatrixXd out(values.size(), spec.dimension());
  for (long i = 0; i < values.size(); ++i) {
    try {
      out.row(i) = eval_basis(values(i), spec);
    } catch (const OutOfSupport& e) {
      throw OutOfSupport(e.value, spec.lo, spec.hi, i);
    }
  }
  return out;
}

}  // namespace scfcq
