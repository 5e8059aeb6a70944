#include "scfcq/quantile_core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace scfcq {

namespace {

constexpr double kBig = 1e20;
constexpr double kStepShrink = 0.99995;

// Frisch-Newton interior point for the bounded-variables LP
//   min c'x  s.t.  A x = rhs,  0 <= x <= 1,
// the dual of the quantile-regression problem (A = design', c = -response,
// rhs = (1-tau) A 1). Returns the LP dual vector, whose negative is the
// coefficient vector. Mehrotra predictor-corrector steps throughout.
Eigen::VectorXd lp_fnb(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs,
                       const Eigen::VectorXd& c, Eigen::VectorXd x, double tol,
                       int max_iter, int& iterations, double& rel_gap,
                       bool& converged) {
  const long p = A.rows();
  const long n = A.cols();

  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd ada(p, p);

  auto factorize = [&](const Eigen::VectorXd& dd) {
    ada.noalias() = A * dd.asDiagonal() * A.transpose();
    llt.compute(ada);
    if (llt.info() != Eigen::Success) {
      // Tiny ridge rescues near-singular scaling late in the iteration.
      ada.diagonal().array() += 1e-12 * ada.trace() + 1e-300;
      llt.compute(ada);
      if (llt.info() != Eigen::Success)
        throw DegenerateDesign("interior-point normal equations not positive definite");
    }
  };

  factorize(d);
  Eigen::VectorXd y = llt.solve(A * c);
  Eigen::VectorXd s = c - A.transpose() * y;

  Eigen::VectorXd z(n), w(n);
  const double eps0 = 1e-10;
  for (long i = 0; i < n; ++i) {
    if (std::abs(s(i)) < eps0) {
      z(i) = std::max(s(i), 0.0) + eps0;
      w(i) = std::max(-s(i), 0.0) + eps0;
    } else {
      z(i) = std::max(s(i), 0.0);
      w(i) = std::max(-s(i), 0.0);
    }
    s(i) = 1.0 - x(i);
  }

  double gap = z.dot(x) + w.dot(s);
  auto relative = [&] { return gap / (1.0 + std::abs(c.dot(x))); };

  Eigen::VectorXd dx(n), ds(n), dz(n), dw(n), dy(p), rhs_save(p), dr(n), u(n);
  iterations = 0;
  while (relative() > tol && iterations < max_iter) {
    ++iterations;
    for (long i = 0; i < n; ++i) {
      d(i) = 1.0 / (z(i) / x(i) + w(i) / s(i));
      ds(i) = z(i) - w(i);
      dz(i) = d(i) * ds(i);
    }
    dy = rhs - A * x + A * dz;
    rhs_save = dy;
    factorize(d);
    dy = llt.solve(dy);
    ds = A.transpose() * dy - ds;

    double deltap = kBig, deltad = kBig;
    for (long i = 0; i < n; ++i) {
      dx(i) = d(i) * ds(i);
      ds(i) = -dx(i);
      dz(i) = -z(i) * (dx(i) / x(i) + 1.0);
      dw(i) = -w(i) * (ds(i) / s(i) + 1.0);
      if (dx(i) < 0) deltap = std::min(deltap, -x(i) / dx(i));
      if (ds(i) < 0) deltap = std::min(deltap, -s(i) / ds(i));
      if (dz(i) < 0) deltad = std::min(deltad, -z(i) / dz(i));
      if (dw(i) < 0) deltad = std::min(deltad, -w(i) / dw(i));
    }
    deltap = std::min(kStepShrink * deltap, 1.0);
    deltad = std::min(kStepShrink * deltad, 1.0);

    if (std::min(deltap, deltad) < 1.0) {
      // Corrector step.
      double mu = z.dot(x) + w.dot(s);
      double g = mu + deltap * dx.dot(z) + deltad * dz.dot(x) +
                 deltap * deltad * dx.dot(dz) + deltap * ds.dot(w) +
                 deltad * dw.dot(s) + deltap * deltad * ds.dot(dw);
      mu = mu * std::pow(g / mu, 3) / (2.0 * static_cast<double>(n));
      for (long i = 0; i < n; ++i) {
        dr(i) = d(i) * (mu * (1.0 / s(i) - 1.0 / x(i)) +
                        dx(i) * dz(i) / x(i) - ds(i) * dw(i) / s(i));
      }
      dy = rhs_save + A * dr;
      dy = llt.solve(dy);
      u = A.transpose() * dy;
      deltap = kBig;
      deltad = kBig;
      for (long i = 0; i < n; ++i) {
        double dxdz = dx(i) * dz(i);
        double dsdw = ds(i) * dw(i);
        dx(i) = d(i) * (u(i) - z(i) + w(i)) - dr(i);
        ds(i) = -dx(i);
        dz(i) = -z(i) + (mu - z(i) * dx(i) - dxdz) / x(i);
        dw(i) = -w(i) + (mu - w(i) * ds(i) - dsdw) / s(i);
        if (dx(i) < 0) deltap = std::min(deltap, -x(i) / dx(i));
        if (ds(i) < 0) deltap = std::min(deltap, -s(i) / ds(i));
        if (dz(i) < 0) deltad = std::min(deltad, -z(i) / dz(i));
        if (dw(i) < 0) deltad = std::min(deltad, -w(i) / dw(i));
      }
      deltap = std::min(kStepShrink * deltap, 1.0);
      deltad = std::min(kStepShrink * deltad, 1.0);
    }

    x += deltap * dx;
    s += deltap * ds;
    y += deltad * dy;
    z += deltad * dz;
    w += deltad * dw;
    gap = z.dot(x) + w.dot(s);
  }
  rel_gap = relative();
  converged = rel_gap <= tol;
  return y;
}

// Exact-fit candidate through the p rows with the smallest scaled residuals.
// Interior-point iterates stop just short of a vertex; when the implied
// vertex is valid and at least as good, snap to it.
void polish(const Eigen::MatrixXd& Xw, const Eigen::VectorXd& yw,
            const RegressionProblem& prob, Eigen::VectorXd& coef) {
  const long m = Xw.rows();
  const long p = Xw.cols();
  if (m < p) return;

  Eigen::VectorXd r = yw - Xw * coef;
  std::vector<long> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::nth_element(idx.begin(), idx.begin() + p - 1, idx.end(),
                   [&](long a, long b) { return std::abs(r(a)) < std::abs(r(b)); });

  Eigen::MatrixXd Xh(p, p);
  Eigen::VectorXd yh(p);
  for (long k = 0; k < p; ++k) {
    Xh.row(k) = Xw.row(idx[k]);
    yh(k) = yw(idx[k]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Xh);
  if (!lu.isInvertible()) return;
  Eigen::VectorXd cand = lu.solve(yh);
  if (objective(prob, cand) <= objective(prob, coef)) coef = cand;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::Degenerate: return "degenerate";
  }
  return "unknown";
}

double check_loss(double u, double tau) {
  return (tau - (u < 0.0 ? 1.0 : 0.0)) * u;
}

double objective(const RegressionProblem& prob, const Eigen::VectorXd& coef) {
  Eigen::VectorXd r = prob.y - prob.X * coef;
  double sum = 0.0, comp = 0.0;
  for (long i = 0; i < prob.n(); ++i) {
    if (prob.w(i) == 0.0) continue;
    double term = prob.w(i) * check_loss(r(i), prob.tau) - comp;
    double t = sum + term;
    comp = (t - sum) - term;
    sum = t;
  }
  return sum;
}

QuantileFit solve(const RegressionProblem& prob, double tol, int max_iter) {
  const long n = prob.n();
  const long p = prob.p();
  if (!(prob.tau > 0.0 && prob.tau < 1.0))
    throw Error("tau must lie strictly inside (0,1)");
  if (prob.X.rows() != n || prob.w.size() != n)
    throw Error("y, X, w dimensions disagree");
  if ((prob.w.array() < 0.0).any())
    throw Error("negative observation weight");

  // Absorb weights by row scaling: w*rho(u) = rho(w*u) for w >= 0.
  std::vector<long> rows;
  rows.reserve(n);
  for (long i = 0; i < n; ++i)
    if (prob.w(i) > 0.0) rows.push_back(i);
  const long m = static_cast<long>(rows.size());
  if (m < p) throw DegenerateDesign("fewer weight-positive rows than parameters");

  Eigen::MatrixXd Xw(m, p);
  Eigen::VectorXd yw(m);
  for (long k = 0; k < m; ++k) {
    Xw.row(k) = prob.w(rows[k]) * prob.X.row(rows[k]);
    yw(k) = prob.w(rows[k]) * prob.y(rows[k]);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
  qr.setThreshold(1e-10);
  if (qr.rank() < p)
    throw DegenerateDesign("weighted design rank " + std::to_string(qr.rank()) +
                           " < " + std::to_string(p));

  QuantileFit fit;
  fit.tau = prob.tau;

  if (m == p) {
    // Interpolation: the unique exact fit is the minimizer.
    fit.coef = qr.solve(yw);
    fit.status = SolveStatus::Converged;
    fit.iterations = 0;
    fit.gap = 0.0;
  } else {
    Eigen::MatrixXd A = Xw.transpose();
    Eigen::VectorXd c = -yw;
    Eigen::VectorXd rhs = (1.0 - prob.tau) * (A * Eigen::VectorXd::Ones(m));
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(m, 1.0 - prob.tau);

    int iters = 0;
    double rel_gap = 0.0;
    bool converged = false;
    Eigen::VectorXd dual =
        lp_fnb(A, rhs, c, x0, tol, max_iter, iters, rel_gap, converged);
    fit.coef = -dual;
    fit.iterations = iters;
    fit.gap = rel_gap;
    fit.status = converged ? SolveStatus::Converged : SolveStatus::MaxIterations;
    polish(Xw, yw, prob, fit.coef);
  }

  fit.residuals = prob.y - prob.X * fit.coef;
  return fit;
}

OptimalityReport certify_optimality(const QuantileFit& fit,
                                    const RegressionProblem& prob,
                                    double zero_tol) {
  OptimalityReport rep;
  const long n = prob.n();
  const long p = prob.p();
  Eigen::VectorXd r = prob.y - prob.X * fit.coef;

  rep.pass = true;
  for (long j = 0; j < p; ++j) {
    double grad = 0.0, bound = 0.0, scale = 0.0;
    long zeros = 0;
    for (long i = 0; i < n; ++i) {
      double w = prob.w(i);
      if (w == 0.0) continue;
      double x = prob.X(i, j);
      scale += w * std::abs(x);
      bool is_zero = std::abs(r(i)) <= zero_tol * (1.0 + std::abs(prob.y(i)));
      double psi = prob.tau - (r(i) < 0.0 && !is_zero ? 1.0 : 0.0);
      grad += w * x * psi;
      if (is_zero) {
        bound += w * std::abs(x);
        ++zeros;
      }
    }
    double slack = 1e-6 * (1.0 + scale);
    rep.worst_violation =
        std::max(rep.worst_violation, std::abs(grad) - (bound + slack));
    if (std::abs(grad) > bound + slack) rep.pass = false;
    if (j == 0) rep.zero_residuals = zeros;
  }
  return rep;
}

}  // namespace scfcq
