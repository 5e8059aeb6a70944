#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "scfcq/basis.hpp"
#include "scfcq/quantile_core.hpp"

namespace scfcq {

// Observed data for the censored quantile model. X is the exogenous design
// (may carry an intercept column); Z must span X's non-constant columns plus
// any excluded instruments. T is the trimming indicator.
struct Dataset {
  Eigen::VectorXd y;  // censored at zero from below
  Eigen::MatrixXd X;
  Eigen::VectorXd R;
  Eigen::MatrixXd Z;
  Eigen::VectorXi T;

  long n() const { return y.size(); }
};

struct ScfcqConfig {
  double tau0 = 0.99;
  double tauL = 0.30;
  double step = 0.01;
  double q0 = 0.10;
  double q1 = 0.03;
  double trim_fraction = 0.01;
  BasisSpec m_basis{BasisKind::Polynomial, 3, 0.0, 1.0};
  double solver_tol = 1e-8;
  int solver_max_iter = 50;
  // Skips the feasible-subsample selector entirely (naive series QR at every
  // grid point); used for baselines and tests.
  bool disable_selector = false;

  void validate() const;
};

struct Theta {
  Eigen::VectorXd beta;   // K_X
  double alpha = 0.0;     // endogenous-regressor coefficient
  Eigen::VectorXd delta;  // J basis coefficients

  long dim() const { return beta.size() + 1 + delta.size(); }
};

struct GridDiagnostics {
  double eta = 0.0;       // threshold used for the final (pass-2) fit
  long subsample = 0;     // weight-positive rows in the final fit
  SolveStatus status = SolveStatus::Converged;
};

struct CoefficientPath {
  std::vector<double> grid;        // strictly decreasing, grid[0] = tau0
  std::vector<Theta> theta;
  std::vector<GridDiagnostics> diag;
  BasisSpec m_basis;

  // Index of the grid point closest to tau.
  long nearest(double tau) const;
};

// Path recursion failed at grid index `index`; the partial path down to
// index-1 rides along.
class PathAborted : public Error {
public:
  PathAborted(long index, CoefficientPath partial, const std::string& why)
      : Error("path aborted at grid index " + std::to_string(index) + ": " + why),
        index(index), partial(std::move(partial)) {}
  long index;
  CoefficientPath partial;
};

// Set T: an observation is dropped when any continuous column of (X, R, Z)
// falls outside its central [fraction/2, 1 - fraction/2] empirical band.
// Columns with at most two distinct values are never trimmed.
Dataset trim(Dataset dataset, double fraction);

// Empirical q-quantile (lower order statistic) of the strictly positive
// entries. Throws NoPositiveFits when there are none.
double threshold(const Eigen::VectorXd& fitted, double q);

// Subsample selector: 1 iff T_i = 1 and the fitted latent quantile under
// theta strictly exceeds eta.
Eigen::VectorXi select(const Dataset& dataset, const Eigen::VectorXd& v_hat,
                       const Theta& theta, double eta, const BasisSpec& m_basis);

// One weighted series quantile regression on [X | R | P_J(V-hat)]. When X
// carries a constant column the basis' first column is dropped from the
// design (its coefficient reported as 0) so the design stays full rank.
Theta fit_at(const Dataset& dataset, const Eigen::VectorXd& v_hat, double tau,
             const Eigen::VectorXd& weights, const ScfcqConfig& cfg,
             SolveStatus* status_out = nullptr);

// Fitted latent quantiles W_i'theta for all observations.
Eigen::VectorXd fitted_values(const Dataset& dataset, const Eigen::VectorXd& v_hat,
                              const Theta& theta, const BasisSpec& m_basis);

// The full downward grid recursion. `multipliers` (bootstrap weights) scale
// every second-step objective weight when present. `reuse` supplies a path
// whose per-step selectors are reused instead of recomputed.
CoefficientPath estimate_path(const Dataset& dataset, const Eigen::VectorXd& v_hat,
                              const ScfcqConfig& cfg,
                              const Eigen::VectorXd* multipliers = nullptr,
                              const CoefficientPath* reuse = nullptr);

// (latent, observed) conditional quantile at a point; observed = max(latent, 0).
std::pair<double, double> predict(const Theta& theta, const Eigen::VectorXd& x,
                                  double r, double v, const BasisSpec& m_basis);

// m(v, tau) estimate at the grid point nearest to tau.
double m_hat(double v, double tau, const CoefficientPath& path);

}  // namespace scfcq
