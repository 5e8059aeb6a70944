#include "scfcq/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "scfcq/stats.hpp"

namespace scfcq {

namespace {

bool is_constant_col(const Eigen::VectorXd& col) {
  return col.maxCoeff() == col.minCoeff();
}

// Continuous for trimming purposes = more than two distinct values.
bool is_continuous_col(const Eigen::VectorXd& col) {
  std::set<double> vals;
  for (long i = 0; i < col.size(); ++i) {
    vals.insert(col(i));
    if (vals.size() > 2) return true;
  }
  return false;
}

void trim_column(const Eigen::VectorXd& col, double fraction, Eigen::VectorXi& T) {
  if (!is_continuous_col(col)) return;
  std::vector<double> sorted(col.data(), col.data() + col.size());
  std::sort(sorted.begin(), sorted.end());
  long n = col.size();
  long m = static_cast<long>(std::floor(static_cast<double>(n) * fraction / 2.0 + 1e-9));
  if (m <= 0) return;
  double lo = sorted[static_cast<size_t>(m)];
  double hi = sorted[static_cast<size_t>(n - 1 - m)];
  for (long i = 0; i < n; ++i)
    if (col(i) < lo || col(i) > hi) T(i) = 0;
}

}  // namespace

void ScfcqConfig::validate() const {
  if (!(tauL > 0.0 && tau0 < 1.0 && tauL <= tau0))
    throw ConfigError("tau0/tauL", "need 0 < tauL <= tau0 < 1");
  // A single-point grid (tau0 == tauL) makes the spacing irrelevant.
  if (!(step > 0.0 && (tau0 == tauL || step <= tau0 - tauL + 1e-12)))
    throw ConfigError("step", "need 0 < step <= tau0 - tauL");
  if (!(q1 >= 0.0 && q1 <= q0 && q0 < 1.0))
    throw ConfigError("q0/q1", "need 0 <= q1 <= q0 < 1");
  if (!(trim_fraction >= 0.0 && trim_fraction <= 0.1))
    throw ConfigError("trim_fraction", "must lie in [0, 0.1]");
}

long CoefficientPath::nearest(double tau) const {
  long best = 0;
  double dist = std::abs(grid[0] - tau);
  for (long l = 1; l < static_cast<long>(grid.size()); ++l) {
    double d = std::abs(grid[static_cast<size_t>(l)] - tau);
    if (d < dist) {
      dist = d;
      best = l;
    }
  }
  return best;
}

Dataset trim(Dataset dataset, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 0.1))
    throw ConfigError("trim_fraction", "must lie in [0, 0.1]");
  dataset.T = Eigen::VectorXi::Ones(dataset.n());
  if (fraction == 0.0) return dataset;
  for (long j = 0; j < dataset.X.cols(); ++j)
    trim_column(dataset.X.col(j), fraction, dataset.T);
  trim_column(dataset.R, fraction, dataset.T);
  for (long j = 0; j < dataset.Z.cols(); ++j)
    trim_column(dataset.Z.col(j), fraction, dataset.T);
  return dataset;
}

double threshold(const Eigen::VectorXd& fitted, double q) {
  std::vector<double> pos;
  pos.reserve(fitted.size());
  for (long i = 0; i < fitted.size(); ++i)
    if (fitted(i) > 0.0) pos.push_back(fitted(i));
  if (pos.empty()) throw NoPositiveFits();
  return quantile_lower(std::move(pos), q);
}

Eigen::VectorXd fitted_values(const Dataset& dataset, const Eigen::VectorXd& v_hat,
                              const Theta& theta, const BasisSpec& m_basis) {
  Eigen::VectorXd out(dataset.n());
  for (long i = 0; i < dataset.n(); ++i)
    out(i) = dataset.X.row(i).dot(theta.beta) + dataset.R(i) * theta.alpha +
             eval_basis(v_hat(i), m_basis).dot(theta.delta);
  return out;
}

Eigen::VectorXi select(const Dataset& dataset, const Eigen::VectorXd& v_hat,
                       const Theta& theta, double eta, const BasisSpec& m_basis) {
  Eigen::VectorXd fit = fitted_values(dataset, v_hat, theta, m_basis);
  Eigen::VectorXi D(dataset.n());
  for (long i = 0; i < dataset.n(); ++i)
    D(i) = (dataset.T(i) == 1 && fit(i) > eta) ? 1 : 0;
  return D;
}

Theta fit_at(const Dataset& dataset, const Eigen::VectorXd& v_hat, double tau,
             const Eigen::VectorXd& weights, const ScfcqConfig& cfg,
             SolveStatus* status_out) {
  const long n = dataset.n();
  const long kx = dataset.X.cols();
  const long J = cfg.m_basis.dimension();
  const long full_dim = kx + 1 + J;

  long positive = 0;
  for (long i = 0; i < n; ++i)
    if (weights(i) > 0.0) ++positive;
  if (positive < 3 * full_dim) throw InsufficientSubsample(positive, 3 * full_dim);

  // The basis spans constants (polynomial leading 1; B-splines sum to one),
  // so its first column is dropped whenever X already has an intercept.
  bool drop_const = false;
  for (long j = 0; j < kx && !drop_const; ++j)
    drop_const = is_constant_col(dataset.X.col(j)) && dataset.X.col(j)(0) != 0.0;

  Eigen::MatrixXd B = build_design(v_hat, cfg.m_basis);
  const long jb = drop_const ? J - 1 : J;
  Eigen::MatrixXd W(n, kx + 1 + jb);
  W.leftCols(kx) = dataset.X;
  W.col(kx) = dataset.R;
  W.rightCols(jb) = B.rightCols(jb);

  RegressionProblem prob{dataset.y, W, weights, tau};
  QuantileFit fit = solve(prob, cfg.solver_tol, cfg.solver_max_iter);
  if (status_out) *status_out = fit.status;

  Theta theta;
  theta.beta = fit.coef.head(kx);
  theta.alpha = fit.coef(kx);
  theta.delta = Eigen::VectorXd::Zero(J);
  theta.delta.tail(jb) = fit.coef.tail(jb);
  return theta;
}

CoefficientPath estimate_path(const Dataset& dataset, const Eigen::VectorXd& v_hat,
                              const ScfcqConfig& cfg,
                              const Eigen::VectorXd* multipliers,
                              const CoefficientPath* reuse) {
  cfg.validate();
  const long n = dataset.n();

  Eigen::VectorXd base(n);
  for (long i = 0; i < n; ++i) {
    base(i) = dataset.T(i) == 1 ? 1.0 : 0.0;
    if (multipliers) base(i) *= (*multipliers)(i);
  }

  CoefficientPath path;
  path.m_basis = cfg.m_basis;
  path.grid.push_back(cfg.tau0);
  for (long l = 1;; ++l) {
    double tau = cfg.tau0 - static_cast<double>(l) * cfg.step;
    if (tau <= cfg.tauL + 1e-12) break;
    path.grid.push_back(tau);
  }
  if (path.grid.back() > cfg.tauL + 1e-12) path.grid.push_back(cfg.tauL);

  auto run_step = [&](long l) {
    const double tau = path.grid[static_cast<size_t>(l)];
    GridDiagnostics diag;
    Theta theta;

    if (l == 0 || cfg.disable_selector) {
      // Initial condition: censoring never binds at tau0, no selector.
      theta = fit_at(dataset, v_hat, tau, base, cfg, &diag.status);
      diag.eta = -std::numeric_limits<double>::infinity();
      long m = 0;
      for (long i = 0; i < n; ++i)
        if (base(i) > 0.0) ++m;
      diag.subsample = m;
    } else if (reuse) {
      // Bootstrap variant that keeps the point-estimate selectors.
      const auto& rd = reuse->diag[static_cast<size_t>(l)];
      Eigen::VectorXi D = select(dataset, v_hat,
                                 reuse->theta[static_cast<size_t>(l) - 1], rd.eta,
                                 cfg.m_basis);
      Eigen::VectorXd w = base;
      long m = 0;
      for (long i = 0; i < n; ++i) {
        w(i) *= D(i);
        if (w(i) > 0.0) ++m;
      }
      theta = fit_at(dataset, v_hat, tau, w, cfg, &diag.status);
      diag.eta = rd.eta;
      diag.subsample = m;
    } else {
      const Theta& prev = path.theta[static_cast<size_t>(l) - 1];

      // Pass 1: threshold from the previous fit's positive fitted values.
      Eigen::VectorXd fitted_prev = fitted_values(dataset, v_hat, prev, cfg.m_basis);
      std::vector<double> pos;
      for (long i = 0; i < n; ++i)
        if (dataset.T(i) == 1 && fitted_prev(i) > 0.0) pos.push_back(fitted_prev(i));
      if (pos.empty()) throw NoPositiveFits();
      double eta1 = quantile_lower(std::move(pos), cfg.q0);
      Eigen::VectorXi D1 = select(dataset, v_hat, prev, eta1, cfg.m_basis);
      Eigen::VectorXd w1 = base;
      for (long i = 0; i < n; ++i) w1(i) *= D1(i);
      Theta pass1 = fit_at(dataset, v_hat, tau, w1, cfg);

      // Pass 2: re-threshold from the pass-1 fit.
      Eigen::VectorXd fitted1 = fitted_values(dataset, v_hat, pass1, cfg.m_basis);
      pos.clear();
      for (long i = 0; i < n; ++i)
        if (dataset.T(i) == 1 && fitted1(i) > 0.0) pos.push_back(fitted1(i));
      if (pos.empty()) throw NoPositiveFits();
      double eta2 = quantile_lower(std::move(pos), cfg.q1);
      Eigen::VectorXi D2 = select(dataset, v_hat, pass1, eta2, cfg.m_basis);
      Eigen::VectorXd w2 = base;
      long m = 0;
      for (long i = 0; i < n; ++i) {
        w2(i) *= D2(i);
        if (w2(i) > 0.0) ++m;
      }
      theta = fit_at(dataset, v_hat, tau, w2, cfg, &diag.status);
      diag.eta = eta2;
      diag.subsample = m;
    }

    path.theta.push_back(std::move(theta));
    path.diag.push_back(diag);
  };

  for (long l = 0; l < static_cast<long>(path.grid.size()); ++l) {
    try {
      run_step(l);
    } catch (const NoPositiveFits& e) {
      path.grid.resize(path.theta.size());
      throw PathAborted(l, std::move(path), e.what());
    } catch (const InsufficientSubsample& e) {
      path.grid.resize(path.theta.size());
      throw PathAborted(l, std::move(path), e.what());
    }
  }
  return path;
}

std::pair<double, double> predict(const Theta& theta, const Eigen::VectorXd& x,
                                  double r, double v, const BasisSpec& m_basis) {
  double latent = x.dot(theta.beta) + r * theta.alpha +
                  eval_basis(v, m_basis).dot(theta.delta);
  return {latent, std::max(latent, 0.0)};
}

double m_hat(double v, double tau, const CoefficientPath& path) {
  long l = path.nearest(tau);
  return eval_basis(v, path.m_basis).dot(path.theta[static_cast<size_t>(l)].delta);
}

}  // namespace scfcq
