#pragma once

#include <cstdint>

#include "lrsm/refine.hpp"
#include "lrsm/rng.hpp"

namespace lrsm {

enum class CiMethod { Approx, PBA, BBA };

struct CiResult {
    CiMethod method = CiMethod::Approx;
    index_t lower = 0;
    index_t upper = 0;
    double alpha = 0.1;
    double delta_hat = 0.0;  // Approx: scale of the pivot
    index_t half = 0;        // PBA: n_p, BBA: n_b
    index_t draws = 0;       // bootstrap replicates
};

// Distribution function of argmax_r B(r) - |r|/2 (two-sided Brownian motion
// with triangular drift); symmetric, so only a > 0 is needed.
double yao_cdf(double a);

// Inverse of yao_cdf on q in (0.5, 1) by bracketing bisection.
double yao_quantile(double q);

// Pivotal CI around tau_hat_j from the drift/variance ratio of the local
// random walk, estimated on the 4h window straddling the change-point.
CiResult ci_approx(const CountSeries& series, const LrsmEstimate& est, index_t j, double alpha);

// Double-sided random walk over a joined replicate of length 2*half+1, with
// the change after position half+1.  w[tau + half] = W(tau); entries with
// missing lags are NaN.  tau_tilde is the argmax restricted to offsets whose
// marginal term does not fall in the first max(p) positions of either half.
struct BootstrapWalk {
    index_t half = 0;
    std::vector<double> w;
    index_t tau_tilde = 0;
};

BootstrapWalk bootstrap_walk(const std::vector<count_t>& joined, index_t half,
                             const GcinarParams& left, const GcinarParams& right);

// Parametric bootstrap: simulate both sides from the fitted conditional-
// Poisson models, track the argmax of the walk, percentile CI.
// n_p = 0 selects the default floor(n/2).
CiResult pba_ci(const CountSeries& series, const LrsmEstimate& est, index_t j, double alpha,
                index_t n_p, index_t B, std::uint64_t seed, Exec exec = Exec::Parallel);

// Block bootstrap: resample contiguous blocks (n_b+1 left, n_b right) from
// the two estimated segments adjacent to change-point j.
CiResult bba_ci(const CountSeries& series, const LrsmEstimate& est, index_t j, double alpha,
                index_t n_b, index_t B, std::uint64_t seed, Exec exec = Exec::Parallel);

// One BBA replicate (exposed so tests can verify blocks are verbatim slices).
// Left block covers (seg_lo, tau], right block (tau, seg_hi].
std::vector<count_t> bba_replicate(const CountSeries& series, index_t seg_lo, index_t tau,
                                   index_t seg_hi, index_t n_b, Rng& rng);

struct AdaptiveBandwidth {
    index_t n_b = 0;
    bool capped = false;      // segment-length cap hit before the criterion held
    double outer_frac = 0.0;  // outer-band fraction at exit
};

// Data-driven block bandwidth: start at twice the width of a pilot CI
// (Approx, falling back to PBA) and grow while too much bootstrap mass sits
// in the outer bands |tau*| >= (1-alpha)*n_b.
AdaptiveBandwidth adaptive_bandwidth(const CountSeries& series, const LrsmEstimate& est, index_t j,
                                     double alpha, index_t B, std::uint64_t seed,
                                     Exec exec = Exec::Parallel);

struct CiOptions {
    double alpha = 0.1;
    index_t B = 1000;
    index_t n_p = 0;  // 0 -> floor(n/2)
    index_t n_b = 0;  // 0 -> adaptive per change-point
    std::uint64_t seed = 1;
    Exec exec = Exec::Parallel;
};

// One CI per change-point at level (1-alpha)^(1/m_hat) each, so the family
// covers all change-points jointly at level 1-alpha.
std::vector<CiResult> simultaneous_ci(const CountSeries& series, const LrsmEstimate& est,
                                      CiMethod method, const CiOptions& opt);

}  // namespace lrsm
