#pragma once

#include <vector>

#include "lrsm/series.hpp"

namespace lrsm {

enum class Criterion { AIC, BIC };

struct FitResult {
    GcinarParams params;
    double loglik = 0.0;
    int order = 0;
    bool converged = false;
    double gradient_norm = 0.0;  // projected-gradient norm at exit
    bool zero_ar_weight = false; // sum of fitted betas at the zero boundary
};

struct SandwichVariance {
    std::vector<std::vector<double>> J;      // (1/n) sum (1/xi_t) x x'
    std::vector<std::vector<double>> I;      // (1/n) sum (X_t/xi_t - 1)^2 x x'
    std::vector<std::vector<double>> Sigma;  // J^-1 I J^-1 (pseudo-inverse if singular)
    std::vector<double> se;                  // sqrt(diag(Sigma)/n)
    bool singular_j = false;
};

// Poisson quasi-log-likelihood sum_t [X_t log xi_t - xi_t] over the window,
// xi_t = beta0 + sum_i beta_i X_{t-i}. Terms whose lags would precede the
// series are dropped: the sum runs from t = max(k+1, p+1) (no fabricated
// pre-sample); for k >= p this is exactly the full window.
double quasi_loglik(const CountSeries& series, Window w, const GcinarParams& params);

// d/dtheta of quasi_loglik: sum_t (X_t/xi_t - 1) * (1, X_{t-1}, .., X_{t-p}).
std::vector<double> quasi_loglik_gradient(const CountSeries& series, Window w,
                                          const GcinarParams& params);

// Constrained PQML fit of order p over theta in [delta,1/delta] x
// {beta >= 0, sum beta <= 1-delta}. Concave objective; active-set projected
// Newton with an Armijo backtracking fallback to projected gradient, stopped
// when the projected-gradient norm is <= 1e-8 * (1 + |loglik|) (cap 200
// iterations). All-zero windows return the boundary fit (delta, 0, .., 0).
FitResult fit_pqml(const CountSeries& series, Window w, int p, double delta = 1e-4);

// Sandwich variance matrices at `params` over the window; Sigma falls back to
// a pseudo-inverse (flagged) when J is numerically singular.
SandwichVariance sandwich(const CountSeries& series, Window w, const GcinarParams& params);

// Smallest argmin over p in {1..p_max} of -2 loglik + penalty, penalty 2(p+1)
// for AIC and (p+1) log(window length) for BIC. p_max is lowered to the
// largest feasible order for short windows.
int select_order(const CountSeries& series, Window w, int p_max, Criterion criterion,
                 double delta = 1e-4);

// Order selection plus the winning fit in one pass (every candidate order is
// fitted anyway); the building block for scan and segment costs.
struct OrderFit {
    int order = 0;
    FitResult fit;
};
OrderFit select_order_fit(const CountSeries& series, Window w, int p_max, Criterion criterion,
                          double delta = 1e-4);

}  // namespace lrsm
