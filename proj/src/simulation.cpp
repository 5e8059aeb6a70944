#include "scfcq/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>

#include "scfcq/parallel.hpp"
#include "scfcq/stats.hpp"

namespace scfcq {

namespace {

double regressor_error(const DgpSpec& spec, double x, double z1, double v) {
  double q = norm_quantile(v);
  return spec.variant == DgpVariant::I ? q : 0.5 * (2.0 + 0.5 * x + 0.5 * z1) * q;
}

double outcome_error(const DgpSpec& spec, double x, double r, double v, double u) {
  const double s2 = std::sqrt(2.0);
  return spec.rho / s2 * norm_quantile(v) +
         (0.4 * (0.5 * r + 0.5 * x + 2.0) + std::sqrt(1.0 - spec.rho * spec.rho)) /
             s2 * norm_quantile(u);
}

}  // namespace

std::pair<Dataset, LatentTruths> generate(long n, const DgpSpec& spec, Rng& rng) {
  Dataset ds;
  LatentTruths truths;
  ds.y.resize(n);
  ds.X.resize(n, 2);
  ds.R.resize(n);
  ds.Z.resize(n, 2);
  ds.T = Eigen::VectorXi::Ones(n);
  truths.V.resize(n);
  truths.U.resize(n);
  truths.y_star.resize(n);

  for (long i = 0; i < n; ++i) {
    double x = rng.normal();
    double z1 = rng.normal();
    double v = rng.uniform();
    double u = rng.uniform();
    double r = spec.gamma0 + spec.gamma1 * z1 + spec.gamma2 * x +
               regressor_error(spec, x, z1, v);
    double eps = outcome_error(spec, x, r, v, u);
    double y_star = spec.beta0 + spec.alpha * r + spec.beta1 * x + eps;

    ds.X(i, 0) = 1.0;
    ds.X(i, 1) = x;
    ds.R(i) = r;
    ds.Z(i, 0) = z1;
    ds.Z(i, 1) = x;
    ds.y(i) = std::max(y_star, 0.0);
    truths.V(i) = v;
    truths.U(i) = u;
    truths.y_star(i) = y_star;
  }
  return {std::move(ds), std::move(truths)};
}

double calibrate_beta0(const DgpSpec& spec, double tolerance, std::uint64_t seed) {
  if (!(tolerance > 0.0)) throw Error("calibrate_beta0: tolerance must be > 0");
  const long n = 1'000'000;

  // Simulate the intercept-free latent part once; the censoring share is then
  // a deterministic decreasing step function of beta0.
  Rng rng(seed, 0xCA11B2A7ULL);
  DgpSpec zero = spec;
  zero.beta0 = 0.0;
  Eigen::VectorXd s(n);
  for (long i = 0; i < n; ++i) {
    double x = rng.normal();
    double z1 = rng.normal();
    double v = rng.uniform();
    double u = rng.uniform();
    double r = zero.gamma0 + zero.gamma1 * z1 + zero.gamma2 * x +
               regressor_error(zero, x, z1, v);
    s(i) = zero.alpha * r + zero.beta1 * x + outcome_error(zero, x, r, v, u);
  }

  auto share = [&](double b0) {
    long c = 0;
    for (long i = 0; i < n; ++i)
      if (s(i) + b0 <= 0.0) ++c;
    return static_cast<double>(c) / static_cast<double>(n);
  };

  double lo = -50.0, hi = 50.0;
  if (share(lo) < spec.censor_target || share(hi) > spec.censor_target)
    throw NoBracket("censoring target not bracketed on [-50, 50]");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double sh = share(mid);
    if (std::abs(sh - spec.censor_target) <= tolerance) return mid;
    (sh > spec.censor_target ? lo : hi) = mid;
    if (hi - lo < 1e-10) break;
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> true_effects(double tau) {
  double e = 1.0 + norm_quantile(tau) / (5.0 * std::sqrt(2.0));
  return {e, e};
}

double true_latent_quantile(const DgpSpec& spec, double tau, double x, double r,
                            double v) {
  const double s2 = std::sqrt(2.0);
  return spec.beta0 + spec.alpha * r + spec.beta1 * x +
         spec.rho / s2 * norm_quantile(v) +
         (0.4 * (0.5 * r + 0.5 * x + 2.0) + std::sqrt(1.0 - spec.rho * spec.rho)) /
             s2 * norm_quantile(tau);
}

McReport run_mc(long G, long n, const DgpSpec& spec, const ScfcqConfig& scfcq_cfg,
                const FirstStageConfig& fs_cfg, std::uint64_t seed,
                const McOptions& opts) {
  if (G < 2) throw Error("run_mc: need G >= 2");
  const long nt = static_cast<long>(opts.report_taus.size());

  // alpha then beta1 per tau, indexed [g][2*t + c]; NaN marks failure.
  std::vector<std::vector<double>> estimates(
      static_cast<size_t>(G),
      std::vector<double>(static_cast<size_t>(2 * nt),
                          std::numeric_limits<double>::quiet_NaN()));

  parallel_for(G, [&](long g) {
    Rng stream = opts.fixed_rep_seed
                     ? Rng(*opts.fixed_rep_seed, 1)
                     : Rng(seed, static_cast<std::uint64_t>(g) + 1);
    try {
      auto [raw, truths] = generate(n, spec, stream);
      ControlVariables cv = fit_first_stage(raw.R, raw.Z, fs_cfg);
      Dataset ds = trim(std::move(raw), scfcq_cfg.trim_fraction);
      CoefficientPath path = estimate_path(ds, cv.v_hat, scfcq_cfg);
      for (long t = 0; t < nt; ++t) {
        long l = path.nearest(opts.report_taus[static_cast<size_t>(t)]);
        const Theta& th = path.theta[static_cast<size_t>(l)];
        estimates[static_cast<size_t>(g)][static_cast<size_t>(2 * t)] = th.alpha;
        estimates[static_cast<size_t>(g)][static_cast<size_t>(2 * t + 1)] =
            th.beta(1);
      }
    } catch (const Error&) {
      // counted below
    }
  });

  McReport rep;
  rep.n = n;
  rep.seed = seed;
  rep.dgp = spec.variant == DgpVariant::I ? "I" : "II";
  rep.basis = scfcq_cfg.m_basis.kind == BasisKind::Polynomial
                  ? "poly:" + std::to_string(scfcq_cfg.m_basis.order_param)
                  : "bspline:" + std::to_string(scfcq_cfg.m_basis.order_param);

  for (const auto& row : estimates)
    if (std::isnan(row[0])) ++rep.failures;
  rep.replications = G - rep.failures;
  if (20 * rep.failures > G) throw TooManyFailures(rep.failures, G);

  for (long t = 0; t < nt; ++t) {
    double tau = opts.report_taus[static_cast<size_t>(t)];
    auto [alpha_true, beta1_true] = true_effects(tau);
    for (int c = 0; c < 2; ++c) {
      double truth = c == 0 ? alpha_true : beta1_true;
      std::vector<double> errs;
      errs.reserve(static_cast<size_t>(rep.replications));
      for (const auto& row : estimates) {
        double est = row[static_cast<size_t>(2 * t + c)];
        if (!std::isnan(est)) errs.push_back(est - truth);
      }
      double bias = sample_mean(errs);
      double sq = 0.0, comp = 0.0;
      for (double e : errs) {
        double y = e * e - comp;
        double tt = sq + y;
        comp = (tt - sq) - y;
        sq = tt;
      }
      double rmse = std::sqrt(sq / static_cast<double>(errs.size()));
      rep.cells.push_back({tau, c == 0 ? "alpha" : "beta1", bias, rmse});
    }
  }
  return rep;
}

std::string mc_report_csv(const McReport& report) {
  std::string out = "dgp,n,G,basis,tau,coef,bias,rmse,failures\n";
  char buf[256];
  for (const auto& cell : report.cells) {
    std::snprintf(buf, sizeof(buf), "%s,%ld,%ld,%s,%.4g,%s,%.12g,%.12g,%ld\n",
                  report.dgp.c_str(), report.n,
                  report.replications + report.failures, report.basis.c_str(),
                  cell.tau, cell.coef.c_str(), cell.bias, cell.rmse,
                  report.failures);
    out += buf;
  }
  return out;
}

}  // namespace scfcq
