#include "scfcq/inference.hpp"

#include <cmath>

#include "scfcq/parallel.hpp"
#include "scfcq/stats.hpp"

namespace scfcq {

void BootstrapConfig::validate() const {
  if (draws < 2) throw ConfigError("draws", "need at least 2");
  if (!(ci_level > 0.0 && ci_level < 1.0))
    throw ConfigError("ci_level", "must lie in (0,1)");
}

Eigen::VectorXd draw_weights(long n, Rng& rng) {
  Eigen::VectorXd w(n);
  for (long i = 0; i < n; ++i) w(i) = rng.exponential();
  return w;
}

BootstrapResult bootstrap_path(const Dataset& dataset, const Eigen::VectorXd& v_hat,
                               const ScfcqConfig& scfcq_cfg,
                               const BootstrapConfig& boot_cfg,
                               const CoefficientPath& point_path) {
  boot_cfg.validate();
  const long n = dataset.n();
  const long kx = dataset.X.cols();
  const long L = static_cast<long>(point_path.grid.size());

  BootstrapResult result;
  result.grid = point_path.grid;
  for (long k = 0; k < kx; ++k)
    result.coef_names.push_back("b" + std::to_string(k));
  result.coef_names.push_back("alpha");
  result.draws.assign(static_cast<size_t>(boot_cfg.draws), {});

  const CoefficientPath* reuse =
      boot_cfg.reuse_point_selectors ? &point_path : nullptr;

  parallel_for(boot_cfg.draws, [&](long t) {
    Rng stream(boot_cfg.seed, static_cast<std::uint64_t>(t) + 1);
    Eigen::VectorXd mult = boot_cfg.unit_weights ? Eigen::VectorXd::Ones(n)
                                                 : draw_weights(n, stream);
    try {
      CoefficientPath path = estimate_path(dataset, v_hat, scfcq_cfg, &mult, reuse);
      auto& slot = result.draws[static_cast<size_t>(t)];
      slot.resize(static_cast<size_t>(L));
      for (long l = 0; l < L; ++l) {
        auto& row = slot[static_cast<size_t>(l)];
        row.reserve(static_cast<size_t>(kx + 1));
        const Theta& th = path.theta[static_cast<size_t>(l)];
        for (long k = 0; k < kx; ++k) row.push_back(th.beta(k));
        row.push_back(th.alpha);
      }
    } catch (const PathAborted&) {
      // recorded as missing
    }
  });

  for (const auto& d : result.draws)
    if (d.empty()) ++result.failed;
  if (10 * result.failed > boot_cfg.draws)
    throw TooManyFailures(result.failed, boot_cfg.draws);

  const double a = (1.0 - boot_cfg.ci_level) / 2.0;
  result.se.assign(static_cast<size_t>(L), std::vector<double>(kx + 1, 0.0));
  result.ci_lo = result.se;
  result.ci_hi = result.se;
  for (long l = 0; l < L; ++l) {
    for (long k = 0; k <= kx; ++k) {
      std::vector<double> vals;
      vals.reserve(result.draws.size());
      for (const auto& d : result.draws)
        if (!d.empty()) vals.push_back(d[static_cast<size_t>(l)][static_cast<size_t>(k)]);
      result.se[l][k] = sample_sd(vals);
      result.ci_lo[l][k] = quantile_interp(vals, a);
      result.ci_hi[l][k] = quantile_interp(vals, 1.0 - a);
    }
  }
  return result;
}

std::vector<SummaryRow> summarize(const BootstrapResult& result,
                                  const CoefficientPath& path) {
  std::vector<SummaryRow> rows;
  const long L = static_cast<long>(result.grid.size());
  const long kx = static_cast<long>(result.coef_names.size()) - 1;
  for (long l = 0; l < L; ++l) {
    const Theta& th = path.theta[static_cast<size_t>(l)];
    for (long k = 0; k <= kx; ++k) {
      double est = k < kx ? th.beta(k) : th.alpha;
      rows.push_back({result.grid[static_cast<size_t>(l)], result.coef_names[k],
                      est, result.se[l][k], result.ci_lo[l][k],
                      result.ci_hi[l][k]});
    }
  }
  return rows;
}

}  // namespace scfcq
