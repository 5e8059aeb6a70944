#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "scfcq/first_stage.hpp"
#include "scfcq/rng.hpp"
#include "scfcq/stats.hpp"

using namespace scfcq;

namespace {

// R = 1 + z1 + z2 + sigma * Phi^{-1}(V), V stored for oracle checks.
struct Synthetic {
  Eigen::VectorXd R;
  Eigen::MatrixXd Z;
  Eigen::VectorXd V;
};

Synthetic make_location_scale(long n, Rng& rng, double sigma = 1.0) {
  Synthetic s;
  s.R.resize(n);
  s.Z.resize(n, 2);
  s.V.resize(n);
  for (long i = 0; i < n; ++i) {
    s.Z(i, 0) = rng.normal();
    s.Z(i, 1) = rng.normal();
    s.V(i) = rng.uniform();
    s.R(i) = 1.0 + s.Z(i, 0) + s.Z(i, 1) + sigma * norm_quantile(s.V(i));
  }
  return s;
}

double ks_against_uniform(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  double ks = 0.0;
  for (long i = 0; i < v.size(); ++i) {
    double ecdf_hi = static_cast<double>(i + 1) / static_cast<double>(v.size());
    double ecdf_lo = static_cast<double>(i) / static_cast<double>(v.size());
    ks = std::max({ks, std::abs(ecdf_hi - v(i)), std::abs(v(i) - ecdf_lo)});
  }
  return ks;
}

}  // namespace

TEST_CASE("normal interquartile spread maps to unit scale") {
  // Q(0.75|z) - Q(0.25|z) = 1.3490 for a standard normal error.
  Rng rng(21);
  Synthetic s = make_location_scale(20000, rng);
  FirstStageConfig cfg;
  ControlVariables cv = fit_parametric(s.R, s.Z, cfg);
  for (long i = 0; i < 20; ++i) CHECK(cv.sigma_hat(i) == doctest::Approx(1.0).epsilon(0.05));
  double denom = norm_quantile(0.75) - norm_quantile(0.25);
  CHECK(denom == doctest::Approx(1.3490).epsilon(1e-3));
}

TEST_CASE("parametric consistency against stored true V") {
  Rng rng(221);
  Synthetic s = make_location_scale(10000, rng);
  FirstStageConfig cfg;
  ControlVariables cv = fit_parametric(s.R, s.Z, cfg);
  double worst = (cv.v_hat - s.V).cwiseAbs().maxCoeff();
  CHECK(worst <= 0.03);
}

TEST_CASE("constant R is rejected") {
  Eigen::VectorXd R = Eigen::VectorXd::Constant(500, 3.0);
  Rng rng(23);
  Eigen::MatrixXd Z(500, 1);
  for (long i = 0; i < 500; ++i) Z(i, 0) = rng.normal();
  FirstStageConfig cfg;
  CHECK_THROWS_AS(fit_parametric(R, Z, cfg), Error);
}

TEST_CASE("v_hat strictly inside (0,1) and monotone in R at fixed z") {
  Rng rng(24);
  Synthetic s = make_location_scale(2000, rng);
  FirstStageConfig cfg;
  ControlVariables cv = fit_parametric(s.R, s.Z, cfg);
  CHECK(cv.v_hat.minCoeff() > 0.0);
  CHECK(cv.v_hat.maxCoeff() < 1.0);

  // fixed Z row, increasing R: V-hat strictly increasing
  Eigen::MatrixXd P = z_design(s.Z.topRows(1), cfg.z_degree);
  double h = (P * cv.gamma_center)(0);
  double prev = -1.0;
  for (double r = h - 2.0; r <= h + 2.0; r += 0.25) {
    double v = norm_cdf((r - h) / cv.sigma_hat(0));
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("location-scale invariance of the parametric control variable") {
  Rng rng(25);
  Synthetic s = make_location_scale(3000, rng);
  FirstStageConfig cfg;
  ControlVariables base = fit_parametric(s.R, s.Z, cfg);

  double a = 2.0;
  Eigen::VectorXd R2 = a * s.R + 0.5 * s.Z.col(0) - 1.5 * s.Z.col(1);
  ControlVariables moved = fit_parametric(R2, s.Z, cfg);
  CHECK((base.v_hat - moved.v_hat).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("local-linear: median residual maps near one half") {
  Rng rng(26);
  Synthetic s = make_location_scale(5000, rng);
  FirstStageConfig cfg;
  cfg.mode = FirstStageMode::LocalLinear;
  ControlVariables cv = fit_local_linear(s.R, s.Z, cfg);
  CHECK(cv.v_hat.minCoeff() > 0.0);
  CHECK(cv.v_hat.maxCoeff() < 1.0);

  // standardized residuals; v_hat at the observation with median residual
  Eigen::MatrixXd P = z_design(s.Z, cfg.z_degree);
  Eigen::VectorXd h = P * cv.gamma_center;
  Eigen::VectorXd e = (s.R - h).cwiseQuotient(cv.sigma_hat);
  std::vector<double> es(e.data(), e.data() + e.size());
  double med = quantile_lower(es, 0.5);
  long at = 0;
  for (long i = 0; i < e.size(); ++i)
    if (std::abs(e(i) - med) < std::abs(e(at) - med)) at = i;
  CHECK(cv.v_hat(at) >= 0.45);
  CHECK(cv.v_hat(at) <= 0.55);
}

TEST_CASE("local-linear tracks the empirical CDF of R") {
  Rng rng(27);
  long n = 1500;
  // no covariates at all: the first stage reduces to intercept-only
  // location/scale, so the residual order is exactly the R order
  Eigen::VectorXd R(n);
  Eigen::MatrixXd Z(n, 0);
  for (long i = 0; i < n; ++i) R(i) = rng.normal();
  FirstStageConfig cfg;
  cfg.mode = FirstStageMode::LocalLinear;
  ControlVariables cv = fit_local_linear(R, Z, cfg);

  std::vector<long> order(n);
  for (long i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](long a, long b) { return R(a) < R(b); });
  double worst = 0.0;
  for (long k = 0; k < n; ++k) {
    double ecdf = static_cast<double>(k) / static_cast<double>(n);
    worst = std::max(worst, std::abs(cv.v_hat(order[static_cast<size_t>(k)]) - ecdf));
  }
  CHECK(worst <= 0.05);

  // sorted by R, v_hat is nondecreasing up to kernel noise
  double worst_drop = 0.0;
  for (long k = 1; k < n; ++k)
    worst_drop = std::max(worst_drop,
                          cv.v_hat(order[static_cast<size_t>(k - 1)]) -
                              cv.v_hat(order[static_cast<size_t>(k)]));
  CHECK(worst_drop <= 0.02);
}

TEST_CASE("uniformity of v_hat on a location-scale sample") {
  Rng rng(28);
  Synthetic s = make_location_scale(5000, rng);
  FirstStageConfig cfg;
  ControlVariables cv = fit_parametric(s.R, s.Z, cfg);
  CHECK(ks_against_uniform(cv.v_hat) <= 0.03);
}
