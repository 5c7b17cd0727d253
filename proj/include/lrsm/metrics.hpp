#pragma once

#include "lrsm/ci.hpp"

namespace lrsm {

// Fraction of replicates whose estimated change-point count equals m0.
double tpr(const std::vector<index_t>& mhats, index_t m0);

struct Zeta {
    double under = 0.0;  // worst distance from an estimated point to the truth
    double over = 0.0;   // worst distance from a true point to the estimate
    double dist = 0.0;   // mean distance from true points to the estimate
};

// Segmentation error metrics on change-point locations as fractions of n.
// An empty estimate scores (0, 1, 1): nothing spurious, everything missed.
Zeta zeta_metrics(const std::vector<double>& est, const std::vector<double>& truth);

// Fitted one-step conditional means under the segmented model; NaN for the
// first p_hat_1 positions where lags are unavailable.
std::vector<double> fitted_means(const CountSeries& series, const LrsmEstimate& est);

// (X_t - xi_t) / sqrt(xi_t) for t = p_hat_1 + 1 .. n.  The conditional
// variance is taken equal to the conditional mean (Poisson working model).
std::vector<double> pearson_residuals(const CountSeries& series, const LrsmEstimate& est);

// sqrt( (1/(n-1)) * sum_{t=2}^{n} (X_t - xi_t)^2 ), skipping terms whose
// lags fall before the start of the series.
double rms(const CountSeries& series, const LrsmEstimate& est);

// Regularized upper incomplete gamma Q(a, x); the chi-square upper tail of x
// with dof degrees of freedom is Q(dof/2, x/2).
double gamma_q(double a, double x);
double chi2_upper_tail(double x, double dof);

struct LjungBox {
    int lag = 0;
    double stat = 0.0;
    double p_value = 1.0;
};

// Portmanteau white-noise test of the residuals at delays 1..max_lag.
std::vector<LjungBox> ljung_box(const std::vector<double>& residuals, int max_lag);

// Fraction of intervals containing the true location.
double coverage(const std::vector<CiResult>& cis, index_t tau0);

}  // namespace lrsm
