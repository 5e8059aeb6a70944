#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "scfcq/quantile_core.hpp"
#include "scfcq/rng.hpp"

using namespace scfcq;

namespace {

// Independent oracle: for an intercept-only design the minimizer of
// sum_i w_i rho_tau(y_i - c) is attained at one of the y values; scan them.
double weighted_quantile_oracle(const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                                double tau) {
  double best = 0.0, best_obj = 1e300;
  for (long k = 0; k < y.size(); ++k) {
    double obj = 0.0;
    for (long i = 0; i < y.size(); ++i)
      obj += w(i) * check_loss(y(i) - y(k), tau);
    if (obj < best_obj) {
      best_obj = obj;
      best = y(k);
    }
  }
  return best;
}

// Enumerate all p-subsets of rows; the optimum sits at one of the exact fits.
double enumerate_min_objective(const RegressionProblem& prob) {
  const long n = prob.n(), p = prob.p();
  double best = 1e300;
  std::vector<long> idx(p);
  std::function<void(long, long)> rec = [&](long start, long k) {
    if (k == p) {
      Eigen::MatrixXd Xh(p, p);
      Eigen::VectorXd yh(p);
      for (long j = 0; j < p; ++j) {
        Xh.row(j) = prob.X.row(idx[static_cast<size_t>(j)]);
        yh(j) = prob.y(idx[static_cast<size_t>(j)]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(Xh);
      if (!lu.isInvertible()) return;
      best = std::min(best, objective(prob, lu.solve(yh)));
      return;
    }
    for (long i = start; i < n; ++i) {
      idx[static_cast<size_t>(k)] = i;
      rec(i + 1, k + 1);
    }
  };
  rec(0, 0);
  return best;
}

RegressionProblem intercept_problem(const Eigen::VectorXd& y, double tau) {
  return {y, Eigen::MatrixXd::Ones(y.size(), 1), Eigen::VectorXd::Ones(y.size()),
          tau};
}

}  // namespace

TEST_CASE("check loss examples and shape") {
  CHECK(check_loss(2.0, 0.5) == doctest::Approx(1.0));
  CHECK(check_loss(-1.0, 0.3) == doctest::Approx(0.7));
  CHECK(check_loss(0.0, 0.9) == 0.0);
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    double u = rng.normal();
    double tau = rng.uniform();
    CHECK(check_loss(u, tau) >= 0.0);
    if (u != 0.0) CHECK(check_loss(u, tau) > 0.0);
  }
}

TEST_CASE("constant design equals the sample quantile") {
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 5;
  QuantileFit fit = solve(intercept_problem(y, 0.5));
  CHECK(fit.coef(0) == doctest::Approx(3.0).epsilon(1e-9));

  Rng rng(11);
  Eigen::VectorXd y8(8);
  for (long i = 0; i < 8; ++i) y8(i) = rng.normal();
  QuantileFit f2 = solve(intercept_problem(y8, 0.25));
  RegressionProblem prob = intercept_problem(y8, 0.25);
  double oracle = weighted_quantile_oracle(y8, prob.w, 0.25);
  CHECK(objective(prob, f2.coef) ==
        doctest::Approx(objective(prob, Eigen::VectorXd::Constant(1, oracle)))
            .epsilon(1e-10));
}

TEST_CASE("weighted order-statistic oracle, random problems") {
  Rng rng(101);
  for (int rep = 0; rep < 200; ++rep) {
    long n = 3 + static_cast<long>(rng.uniform() * 47);
    Eigen::VectorXd y(n), w(n);
    for (long i = 0; i < n; ++i) {
      y(i) = rng.normal() * 3.0;
      w(i) = rng.uniform() < 0.2 ? 0.0 : rng.exponential();
    }
    if ((w.array() > 0).count() < 1) w(0) = 1.0;
    double tau = 0.05 + 0.9 * rng.uniform();
    RegressionProblem prob{y, Eigen::MatrixXd::Ones(n, 1), w, tau};
    QuantileFit fit = solve(prob);
    double oracle = weighted_quantile_oracle(y, w, tau);
    CHECK(objective(prob, fit.coef) <=
          objective(prob, Eigen::VectorXd::Constant(1, oracle)) + 1e-8);
  }
}

TEST_CASE("tiny LP enumeration oracle") {
  Rng rng(202);
  for (int rep = 0; rep < 200; ++rep) {
    long n = 3 + static_cast<long>(rng.uniform() * 4);  // 3..6
    long p = 1 + static_cast<long>(rng.uniform() * 2);  // 1..2
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    X.col(0).setOnes();
    for (long i = 0; i < n; ++i) {
      y(i) = rng.normal();
      if (p > 1) X(i, 1) = rng.normal();
    }
    double tau = 0.1 + 0.8 * rng.uniform();
    RegressionProblem prob{y, X, Eigen::VectorXd::Ones(n), tau};
    QuantileFit fit = solve(prob);
    CHECK(objective(prob, fit.coef) <= enumerate_min_objective(prob) + 1e-8);
  }
}

TEST_CASE("equivariance under scaling and regression shift") {
  Rng rng(303);
  long n = 60, p = 3;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  X.col(0).setOnes();
  for (long i = 0; i < n; ++i) {
    X(i, 1) = rng.normal();
    X(i, 2) = rng.uniform();
    y(i) = 1.0 + X(i, 1) - 2.0 * X(i, 2) + rng.normal();
  }
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  RegressionProblem base{y, X, w, 0.3};
  Eigen::VectorXd coef = solve(base).coef;

  double lambda = 2.5;
  Eigen::VectorXd scaled = solve({lambda * y, X, w, 0.3}).coef;
  CHECK((scaled - lambda * coef).norm() <= 1e-8 * (1.0 + coef.norm() * lambda));

  Eigen::VectorXd delta(p);
  delta << 0.7, -1.1, 0.4;
  Eigen::VectorXd shifted = solve({y + X * delta, X, w, 0.3}).coef;
  CHECK((shifted - (coef + delta)).norm() <= 1e-8 * (1.0 + coef.norm()));
}

TEST_CASE("residual sign counts at an unweighted optimum") {
  Rng rng(404);
  for (double tau : {0.25, 0.5, 0.8}) {
    long n = 101;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    X.col(0).setOnes();
    for (long i = 0; i < n; ++i) {
      X(i, 1) = rng.normal();
      y(i) = X(i, 1) + rng.normal();
    }
    QuantileFit fit = solve({y, X, Eigen::VectorXd::Ones(n), tau});
    long neg = 0, nonpos = 0;
    for (long i = 0; i < n; ++i) {
      if (fit.residuals(i) < -1e-9) ++neg;
      if (fit.residuals(i) <= 1e-9) ++nonpos;
    }
    CHECK(static_cast<double>(neg) <= static_cast<double>(n) * tau + 1e-9);
    CHECK(static_cast<double>(nonpos) >= static_cast<double>(n) * tau - 1e-9);
  }
}

TEST_CASE("zero-weight rows never affect the fit") {
  Rng rng(505);
  long n = 80;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n), w(n);
  X.col(0).setOnes();
  for (long i = 0; i < n; ++i) {
    X(i, 1) = rng.normal();
    y(i) = 2.0 - X(i, 1) + rng.normal();
    w(i) = i % 3 == 0 ? 0.0 : 1.0 + rng.uniform();
  }
  RegressionProblem full{y, X, w, 0.6};
  Eigen::VectorXd coef_full = solve(full).coef;

  std::vector<long> keep;
  for (long i = 0; i < n; ++i)
    if (w(i) > 0) keep.push_back(i);
  long m = static_cast<long>(keep.size());
  Eigen::MatrixXd Xs(m, 2);
  Eigen::VectorXd ys(m), ws(m);
  for (long k = 0; k < m; ++k) {
    Xs.row(k) = X.row(keep[static_cast<size_t>(k)]);
    ys(k) = y(keep[static_cast<size_t>(k)]);
    ws(k) = w(keep[static_cast<size_t>(k)]);
  }
  RegressionProblem sub{ys, Xs, ws, 0.6};
  Eigen::VectorXd coef_sub = solve(sub).coef;
  CHECK(objective(full, coef_sub) == doctest::Approx(objective(full, coef_full))
                                         .epsilon(1e-9));
}

TEST_CASE("degenerate designs are rejected") {
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 5;
  Eigen::MatrixXd X(5, 2);
  X.col(0).setOnes();
  X.col(1).setOnes();  // duplicated column
  CHECK_THROWS_AS(solve({y, X, Eigen::VectorXd::Ones(5), 0.5}), DegenerateDesign);

  // weights kill all but p-1 rows
  Eigen::MatrixXd X2(5, 2);
  X2.col(0).setOnes();
  X2.col(1) << 1, 2, 3, 4, 5;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(5);
  w(0) = 1.0;
  CHECK_THROWS_AS(solve({y, X2, w, 0.5}), DegenerateDesign);
}

TEST_CASE("optimality certificate") {
  Eigen::VectorXd y(7);
  y << -3, -1, 0, 2, 5, 8, 13;
  RegressionProblem prob = intercept_problem(y, 0.5);
  QuantileFit fit = solve(prob);
  OptimalityReport rep = certify_optimality(fit, prob);
  CHECK(rep.pass);
  CHECK(rep.zero_residuals == 1);  // the sample median interpolates one point

  QuantileFit bad = fit;
  bad.coef(0) += 0.1;
  CHECK(objective(prob, bad.coef) > objective(prob, fit.coef));
  CHECK_FALSE(certify_optimality(bad, prob).pass);

  // exact-fit problem: n = p, all residuals zero
  Eigen::MatrixXd X(2, 2);
  X << 1, 0, 1, 1;
  Eigen::VectorXd y2(2);
  y2 << 3, 7;
  RegressionProblem interp{y2, X, Eigen::VectorXd::Ones(2), 0.4};
  QuantileFit f = solve(interp);
  CHECK(f.residuals.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(certify_optimality(f, interp).pass);
}

TEST_CASE("halving all weights leaves the minimizer unchanged") {
  Rng rng(606);
  long n = 50;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  X.col(0).setOnes();
  for (long i = 0; i < n; ++i) {
    X(i, 1) = rng.normal();
    y(i) = X(i, 1) + rng.normal();
  }
  RegressionProblem a{y, X, Eigen::VectorXd::Ones(n), 0.7};
  RegressionProblem b{y, X, Eigen::VectorXd::Constant(n, 0.5), 0.7};
  CHECK((solve(a).coef - solve(b).coef).norm() <= 1e-7);
}
