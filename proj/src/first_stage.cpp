#include "scfcq/first_stage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "scfcq/parallel.hpp"
#include "scfcq/quantile_core.hpp"
#include "scfcq/stats.hpp"

namespace scfcq {

ErrorDistribution ErrorDistribution::standard_normal() {
  return {[](double x) { return norm_cdf(x); },
          [](double p) { return norm_quantile(p); }};
}

Eigen::MatrixXd z_design(const Eigen::MatrixXd& Z, int degree) {
  const long n = Z.rows();
  const long K = Z.cols();
  Eigen::MatrixXd P(n, 1 + K * degree);
  P.col(0).setOnes();
  for (int d = 1; d <= degree; ++d)
    for (long k = 0; k < K; ++k)
      P.col(1 + (d - 1) * K + k) = Z.col(k).array().pow(d);
  return P;
}

namespace {

double clamp_unit(double v, long n) {
  double eps = 1.0 / (2.0 * static_cast<double>(n));
  return std::clamp(v, eps, 1.0 - eps);
}

Eigen::VectorXd series_qr(const Eigen::VectorXd& R, const Eigen::MatrixXd& P,
                          double tau) {
  RegressionProblem prob{R, P, Eigen::VectorXd::Ones(R.size()), tau};
  return solve(prob).coef;
}

}  // namespace

ControlVariables fit_parametric(const Eigen::VectorXd& R, const Eigen::MatrixXd& Z,
                                const FirstStageConfig& cfg) {
  const long n = R.size();
  Eigen::MatrixXd P = z_design(Z, cfg.z_degree);
  if (n <= 5 * P.cols())
    throw Error("first stage needs n > 5 * dim(P_JZ)");

  ControlVariables out;
  out.mode = FirstStageMode::ParametricF;
  out.gamma_center = series_qr(R, P, cfg.v_center);
  Eigen::VectorXd g1 = series_qr(R, P, cfg.v1);
  Eigen::VectorXd g2 = series_qr(R, P, cfg.v2);

  double denom = cfg.error_cdf.quantile(cfg.v2) - cfg.error_cdf.quantile(cfg.v1);
  Eigen::VectorXd spread = P * (g2 - g1);
  out.sigma_hat = spread / denom;

  std::vector<long> crossed;
  for (long i = 0; i < n; ++i)
    if (!(out.sigma_hat(i) > 0.0)) crossed.push_back(i);
  if (!crossed.empty()) {
    if (!cfg.clamp_sigma_floor) throw QuantileCrossing(crossed);
    double sd_r = sample_sd(std::vector<double>(R.data(), R.data() + n));
    double floor = 1e-6 * sd_r;
    if (!(floor > 0.0)) throw QuantileCrossing(crossed);
    for (long i : crossed) out.sigma_hat(i) = floor;
  }

  Eigen::VectorXd h = P * out.gamma_center;
  out.v_hat.resize(n);
  for (long i = 0; i < n; ++i)
    out.v_hat(i) = clamp_unit(cfg.error_cdf.cdf((R(i) - h(i)) / out.sigma_hat(i)), n);
  return out;
}

ControlVariables fit_local_linear(const Eigen::VectorXd& R, const Eigen::MatrixXd& Z,
                                  const FirstStageConfig& cfg) {
  const long n = R.size();
  if (n < 100) throw Error("local-linear first stage needs n >= 100");

  // Location/scale come from the parametric machinery; only the CDF shape is
  // left to the kernel step.
  FirstStageConfig pcfg = cfg;
  pcfg.mode = FirstStageMode::ParametricF;
  ControlVariables base = fit_parametric(R, Z, pcfg);

  Eigen::MatrixXd P = z_design(Z, cfg.z_degree);
  Eigen::VectorXd h = P * base.gamma_center;
  Eigen::VectorXd e(n);
  for (long i = 0; i < n; ++i) e(i) = (R(i) - h(i)) / base.sigma_hat(i);

  // Robust spread (min of SD and IQR/1.349) keeps the window sane when a few
  // standardized residuals are extreme, e.g. after scale flooring.
  double sd = sample_sd(std::vector<double>(e.data(), e.data() + n));
  std::vector<double> es(e.data(), e.data() + n);
  double iqr = quantile_interp(es, 0.75) - quantile_interp(es, 0.25);
  if (iqr > 0.0) sd = std::min(sd, iqr / 1.349);
  double bw = 1.06 * sd * std::pow(static_cast<double>(n), -0.2) * cfg.bandwidth_rule;
  if (!(bw > 0.0)) throw BandwidthTooSmall("degenerate residual spread");

  ControlVariables out;
  out.mode = FirstStageMode::LocalLinear;
  out.gamma_center = base.gamma_center;
  out.sigma_hat = base.sigma_hat;
  out.v_hat.resize(n);

  std::exception_ptr bad;
  std::mutex bad_mx;
  parallel_for(n, [&](long i) {
    // sparse neighborhoods (residual tails) widen the window to the fifth
    // nearest neighbor; everywhere else the common bandwidth is kept so the
    // smoothed CDF stays monotone in the residual
    double bw_i = bw;
    {
      std::vector<double> dist(static_cast<size_t>(n));
      for (long j = 0; j < n; ++j)
        dist[static_cast<size_t>(j)] =
            j == i ? std::numeric_limits<double>::infinity()
                   : std::abs(e(j) - e(i));
      if (n >= 6) {
        std::nth_element(dist.begin(), dist.begin() + 4, dist.end());
        if (dist[4] >= bw) bw_i = 1.25 * dist[4] + 1e-300;
      }
    }
    // kernel-smoothed empirical CDF of the standardized residuals: the
    // indicator 1{e_j < e_i} smoothed by the integrated Epanechnikov kernel
    double acc = 0.0;
    long mass = 0;
    for (long j = 0; j < n; ++j) {
      double u = (e(i) - e(j)) / bw_i;
      if (u >= 1.0) {
        acc += 1.0;
        continue;
      }
      if (u <= -1.0) continue;
      acc += 0.5 + 0.75 * (u - u * u * u / 3.0);
      if (j != i) ++mass;
    }
    if (mass < 5) {
      std::lock_guard<std::mutex> lk(bad_mx);
      if (!bad)
        bad = std::make_exception_ptr(
            BandwidthTooSmall("local design at row " + std::to_string(i) +
                              " has effective mass " + std::to_string(mass)));
      return;
    }
    out.v_hat(i) = clamp_unit(acc / static_cast<double>(n), n);
  });
  if (bad) std::rethrow_exception(bad);
  return out;
}

ControlVariables fit_first_stage(const Eigen::VectorXd& R, const Eigen::MatrixXd& Z,
                                 const FirstStageConfig& cfg) {
  return cfg.mode == FirstStageMode::ParametricF ? fit_parametric(R, Z, cfg)
                                                 : fit_local_linear(R, Z, cfg);
}

}  // namespace scfcq
