// Criterion 6 (slow suite): bootstrap coverage of the true median effect.
// 100 independent DGP I datasets of size 1000; for each, a 200-draw weighted
// bootstrap builds a 95% percentile CI for alpha(0.5). The CI must cover the
// truth (1.0) in between 88 and 99 of the 100 runs.

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "scfcq/estimator.hpp"
#include "scfcq/first_stage.hpp"
#include "scfcq/inference.hpp"
#include "scfcq/rng.hpp"
#include "scfcq/simulation.hpp"

using namespace scfcq;

TEST_CASE("criterion 6: bootstrap coverage at the median") {
  DgpSpec spec;
  spec.beta0 = calibrate_beta0(spec, 0.002);
  ScfcqConfig cfg;
  FirstStageConfig fs;
  BootstrapConfig boot;
  boot.draws = 200;
  boot.ci_level = 0.95;

  const int outer = 100;
  int covered = 0, failed = 0;
  for (int g = 0; g < outer; ++g) {
    Rng rng(606, static_cast<std::uint64_t>(g) + 1);
    auto [raw, truths] = generate(1000, spec, rng);
    try {
      ControlVariables cv = fit_first_stage(raw.R, raw.Z, fs);
      Dataset ds = trim(std::move(raw), cfg.trim_fraction);
      CoefficientPath path = estimate_path(ds, cv.v_hat, cfg);
      boot.seed = 70000 + static_cast<std::uint64_t>(g);
      BootstrapResult bs = bootstrap_path(ds, cv.v_hat, cfg, boot, path);
      size_t l = path.nearest(0.5);
      size_t alpha_idx = bs.coef_names.size() - 1;
      double lo = bs.ci_lo[l][alpha_idx], hi = bs.ci_hi[l][alpha_idx];
      if (lo <= 1.0 && 1.0 <= hi) ++covered;
    } catch (const Error&) {
      ++failed;
    }
    if ((g + 1) % 10 == 0) {
      std::printf("  coverage progress: %d/%d runs, %d covered, %d failed\n",
                  g + 1, outer, covered, failed);
      std::fflush(stdout);
    }
  }

  bool pass = failed <= 5 && covered >= 88 && covered <= 99;
  std::printf("criterion 6: %s  (covered %d/100, %d failed runs)\n",
              pass ? "PASS" : "FAIL", covered, failed);
  std::fflush(stdout);
  CHECK(pass);
}
