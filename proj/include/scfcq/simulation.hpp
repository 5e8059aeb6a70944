#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scfcq/estimator.hpp"
#include "scfcq/first_stage.hpp"
#include "scfcq/rng.hpp"

namespace scfcq {

enum class DgpVariant { I, II };

struct DgpSpec {
  DgpVariant variant = DgpVariant::I;
  double rho = 0.5;
  double gamma0 = 1.0, gamma1 = 1.0, gamma2 = 1.0;
  double alpha = 1.0, beta1 = 1.0;
  double beta0 = 0.0;  // calibrated; see calibrate_beta0
  double censor_target = 0.30;
};

// Latent quantities kept for oracle checks.
struct LatentTruths {
  Eigen::VectorXd V;
  Eigen::VectorXd U;
  Eigen::VectorXd y_star;
};

struct McCell {
  double tau;
  std::string coef;  // "alpha" or "beta1"
  double bias;
  double rmse;
};

struct McReport {
  std::vector<McCell> cells;
  long replications = 0;
  long failures = 0;
  // config echo
  long n = 0;
  std::string dgp;
  std::string basis;
  std::uint64_t seed = 0;
};

// Draw one sample of size n. Dataset.X = [1, X]; Z = [Z1, X].
std::pair<Dataset, LatentTruths> generate(long n, const DgpSpec& spec, Rng& rng);

// Bisection for the intercept that puts the raw censoring share at
// censor_target, on a fixed simulated sample of one million draws.
double calibrate_beta0(const DgpSpec& spec, double tolerance,
                       std::uint64_t seed = 0x5CFC0CA11B2A7E0DULL);

// True distributional effects (alpha(tau), beta1(tau)); identical for both
// DGP variants, which share the latent outcome equation.
std::pair<double, double> true_effects(double tau);

// True latent conditional quantile at (x, r, v) for these DGPs.
double true_latent_quantile(const DgpSpec& spec, double tau, double x, double r,
                            double v);

struct McOptions {
  std::vector<double> report_taus = {0.9, 0.7, 0.5, 0.3};
  // Test hook: every replication reuses this seed instead of a per-index stream.
  std::optional<std::uint64_t> fixed_rep_seed;
};

// The full Monte Carlo study: G replications of generate -> first stage ->
// trim -> path, aggregated into bias and RMSE per (tau, coefficient).
McReport run_mc(long G, long n, const DgpSpec& spec, const ScfcqConfig& scfcq_cfg,
                const FirstStageConfig& fs_cfg, std::uint64_t seed,
                const McOptions& opts = {});

std::string mc_report_csv(const McReport& report);

}  // namespace scfcq
