#pragma once

#include <vector>

namespace scfcq {

// Standard normal CDF.
double norm_cdf(double x);

// Standard normal density.
double norm_pdf(double x);

// Standard normal quantile function. Rational approximation (Acklam) with one
// Halley refinement; absolute error well under 1.5e-8 on (0,1).
double norm_quantile(double p);

// Lower-order-statistic empirical quantile: the value at 1-based index
// ceil(m*q) of the sorted sample (index clamped to [1, m]). Reproducible
// across platforms, unlike interpolating definitions.
double quantile_lower(std::vector<double> values, double q);

// Type-7 (linear interpolation) quantile, used for bootstrap percentile CIs.
double quantile_interp(std::vector<double> values, double q);

double sample_mean(const std::vector<double>& values);

// Sample standard deviation with ddof = 1.
double sample_sd(const std::vector<double>& values);

}  // namespace scfcq
