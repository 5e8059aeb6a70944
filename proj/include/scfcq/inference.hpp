#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scfcq/estimator.hpp"
#include "scfcq/rng.hpp"

namespace scfcq {

struct BootstrapConfig {
  long draws = 999;
  std::uint64_t seed = 0;
  double ci_level = 0.95;
  // Test hook: force every multiplier to 1, reproducing the point path.
  bool unit_weights = false;
  // Reuse the point path's per-step selectors instead of recomputing
  // thresholds inside each draw.
  bool reuse_point_selectors = false;

  void validate() const;
};

struct BootstrapResult {
  std::vector<double> grid;
  std::vector<std::string> coef_names;  // K_X betas then alpha
  // draws[t][l][k]; failed draws are empty.
  std::vector<std::vector<std::vector<double>>> draws;
  std::vector<std::vector<double>> se;     // [l][k]
  std::vector<std::vector<double>> ci_lo;  // [l][k]
  std::vector<std::vector<double>> ci_hi;
  long failed = 0;
};

struct SummaryRow {
  double tau;
  std::string coef;
  double estimate;
  double se;
  double ci_lo;
  double ci_hi;
};

// n i.i.d. standard-exponential multipliers.
Eigen::VectorXd draw_weights(long n, Rng& rng);

// Weighted (multiplier) bootstrap of the full path. v_hat stays fixed across
// draws; each draw reruns the grid recursion with objective weights scaled by
// its own exponential multipliers. Draws whose path aborts are recorded as
// missing; more than 10% missing raises TooManyFailures.
BootstrapResult bootstrap_path(const Dataset& dataset, const Eigen::VectorXd& v_hat,
                               const ScfcqConfig& scfcq_cfg,
                               const BootstrapConfig& boot_cfg,
                               const CoefficientPath& point_path);

// Flat report rows (tau, coefficient, estimate, se, ci bounds).
std::vector<SummaryRow> summarize(const BootstrapResult& result,
                                  const CoefficientPath& path);

}  // namespace scfcq
