#pragma once

#include <Eigen/Dense>

#include "scfcq/errors.hpp"

namespace scfcq {

// A weighted linear quantile-regression instance. X includes any intercept
// column the caller wants; w encodes trimming/selector indicators and
// bootstrap multipliers.
struct RegressionProblem {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::VectorXd w;
  double tau = 0.5;

  long n() const { return y.size(); }
  long p() const { return X.cols(); }
};

enum class SolveStatus { Converged, MaxIterations, Degenerate };

const char* to_string(SolveStatus s);

struct QuantileFit {
  Eigen::VectorXd coef;
  double tau = 0.5;
  Eigen::VectorXd residuals;  // y - X*coef, full length n
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  double gap = 0.0;  // final duality gap, relative to 1 + |objective|
};

struct OptimalityReport {
  bool pass = false;
  double worst_violation = 0.0;  // max over columns of |grad| - bound
  long zero_residuals = 0;
};

// rho_tau(u) = (tau - 1{u<0}) u
double check_loss(double u, double tau);

// Weighted check-loss objective sum_i w_i rho_tau(y_i - x_i'c).
double objective(const RegressionProblem& prob, const Eigen::VectorXd& coef);

// Minimize the weighted check-loss objective by a Frisch-Newton primal-dual
// interior point method with Mehrotra predictor-corrector steps, followed by
// a vertex polish. Zero-weight rows are dropped before factorization.
//
// Throws DegenerateDesign when the weighted design has rank < p. A fit that
// exhausts max_iter is still returned, flagged MaxIterations.
QuantileFit solve(const RegressionProblem& prob, double tol = 1e-8,
                  int max_iter = 50);

// Subgradient optimality check: for every column j,
//   |sum_i w_i x_ij (tau - 1{r_i<0})| <= sum_{r_i = 0} w_i |x_ij| + slack
// with residuals within zero_tol of 0 treated as zero.
OptimalityReport certify_optimality(const QuantileFit& fit,
                                    const RegressionProblem& prob,
                                    double zero_tol = 1e-7);

}  // namespace scfcq
