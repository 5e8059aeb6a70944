#pragma once

#include <Eigen/Dense>
#include <functional>

#include "scfcq/basis.hpp"

namespace scfcq {

enum class FirstStageMode { ParametricF, LocalLinear };

// Distribution of the standardized first-stage error: CDF and quantile
// function. Must be strictly increasing with Q(0.5-ish) pinned so that the
// location regression identifies h(z); the standard normal default has its
// zero quantile at 0.5.
struct ErrorDistribution {
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;

  static ErrorDistribution standard_normal();
};

struct FirstStageConfig {
  FirstStageMode mode = FirstStageMode::ParametricF;
  double v_center = 0.5;      // location quantile
  double v1 = 0.25, v2 = 0.75;  // scale quantile pair
  ErrorDistribution error_cdf = ErrorDistribution::standard_normal();
  int z_degree = 1;           // additive polynomial degree for P_{J_Z}(Z)
  double bandwidth_rule = 1.0;  // multiplies the default local-linear bandwidth
  bool clamp_sigma_floor = false;  // recover from quantile crossing by flooring
};

// Estimated control variable plus first-stage fit artifacts.
struct ControlVariables {
  Eigen::VectorXd v_hat;        // in (0,1), clamped to [1/(2n), 1-1/(2n)]
  Eigen::VectorXd gamma_center; // location series coefficients
  Eigen::VectorXd sigma_hat;    // per-observation scale
  FirstStageMode mode = FirstStageMode::ParametricF;
};

// Additive polynomial design for the instrument matrix:
// (1, z_1..z_K, z_1^2..z_K^2, ...) up to degree, no interactions.
Eigen::MatrixXd z_design(const Eigen::MatrixXd& Z, int degree);

// Parametric-distribution residual method: three series quantile regressions
// of R on P_{J_Z}(Z) give the location fit and an interquantile-spread scale;
// V-hat = F((R - h(Z)) / sigma(Z)).
ControlVariables fit_parametric(const Eigen::VectorXd& R, const Eigen::MatrixXd& Z,
                                const FirstStageConfig& cfg);

// Local (kernel) method: V-hat_i smooths the indicators 1{e_j < e_i} of the
// standardized residuals with the integrated Epanechnikov kernel — a
// kernel-smoothed empirical CDF evaluated at each residual. Location and
// scale are reused from the parametric fit.
ControlVariables fit_local_linear(const Eigen::VectorXd& R, const Eigen::MatrixXd& Z,
                                  const FirstStageConfig& cfg);

ControlVariables fit_first_stage(const Eigen::VectorXd& R, const Eigen::MatrixXd& Z,
                                 const FirstStageConfig& cfg);

}  // namespace scfcq
