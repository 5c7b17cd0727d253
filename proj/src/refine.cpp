#include "lrsm/refine.hpp"

#include <algorithm>
#include <cmath>

namespace lrsm {

index_t refine_changepoint(const CountSeries& series, index_t tau2, int p_left, int p_right,
                           index_t h, index_t ext_lo, index_t ext_hi, double delta) {
    const index_t n = series.n();
    if (h < 1) throw InputError("refine_changepoint: h < 1");
    if (p_left < 1 || p_right < 1) throw InputError("refine_changepoint: order < 1");
    if (tau2 < 1 || tau2 >= n) throw InputError("refine_changepoint: tau2 out of range");
    if (ext_lo < 0) ext_lo = std::max<index_t>(tau2 - 2 * h, 0);
    if (ext_hi < 0) ext_hi = std::min<index_t>(tau2 + 2 * h, n);
    if (ext_lo >= tau2 || ext_hi <= tau2) throw InputError("refine_changepoint: bad window");

    // Candidate range: (tau2-h, tau2+h] minus the p+2 edge clamp per side.
    index_t lo_t = std::max<index_t>(tau2 - h + 1, ext_lo + p_left + 2);
    index_t hi_t = std::min<index_t>(tau2 + h, ext_hi - (p_right + 2));
    if (lo_t > hi_t)
        throw InfeasibleError("refine_changepoint: window clamp leaves fewer than p+2 points on a side");

    index_t best_tau = lo_t;
    double best = -std::numeric_limits<double>::infinity();
    for (index_t t = lo_t; t <= hi_t; ++t) {
        FitResult left = fit_pqml(series, Window{ext_lo, t - ext_lo}, p_left, delta);
        FitResult right = fit_pqml(series, Window{t, ext_hi - t}, p_right, delta);
        double L = left.loglik + right.loglik;
        if (L > best) {
            best = L;
            best_tau = t;
        }
    }
    return best_tau;
}

LrsmEstimate lrsm_detect(const CountSeries& series, const ScanConfig& cfg) {
    const index_t n = series.n();
    cfg.validate(n);
    if (n < 4 * cfg.h_max())
        throw InfeasibleError("lrsm_detect: series shorter than 4*max(h)");

    ChangePointSet cands = scan_multi(series, cfg);
    PartitionResult part =
        optimal_partition(series, cands, cfg.p_max, cfg.order_criterion, cfg.delta, cfg.exec);

    const std::size_t m = part.selected.taus.size();
    LrsmEstimate est;
    est.n = n;
    est.stage1 = cands;
    est.stage2 = part.selected;
    est.orders = part.orders;

    // Step 3: refine each tau in its own extended window, truncated at the
    // midpoint between neighbours so ranges never cross.
    std::vector<index_t> refined(m, 0);
    const bool par = cfg.exec == Exec::Parallel;
    const std::int64_t mi = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(dynamic) if (par)
    for (std::int64_t j = 0; j < mi; ++j) {
        index_t tau2 = part.selected.taus[static_cast<std::size_t>(j)];
        index_t hj = part.selected.radii.empty() ? cfg.h_max()
                                                 : part.selected.radii[static_cast<std::size_t>(j)];
        index_t lo = std::max<index_t>(tau2 - 2 * hj, 0);
        index_t hi = std::min<index_t>(tau2 + 2 * hj, n);
        if (j > 0) {
            index_t left_tau = part.selected.taus[static_cast<std::size_t>(j - 1)];
            lo = std::max(lo, (left_tau + tau2) / 2);
        }
        if (j + 1 < mi) {
            index_t right_tau = part.selected.taus[static_cast<std::size_t>(j + 1)];
            hi = std::min(hi, (tau2 + right_tau) / 2);
        }
        refined[static_cast<std::size_t>(j)] =
            refine_changepoint(series, tau2, part.orders[static_cast<std::size_t>(j)],
                               part.orders[static_cast<std::size_t>(j) + 1], hj, lo, hi,
                               cfg.delta);
    }

    est.taus.taus = refined;
    est.taus.scores = part.selected.scores;
    est.taus.radii = part.selected.radii;
    est.taus.validate(n);
    est.m_hat = static_cast<index_t>(m);

    // Final per-segment fits at the step-2 orders, plus sandwich SEs.
    for (std::size_t j = 0; j < m + 1; ++j) {
        Window w = segment_view(series, est.taus, static_cast<index_t>(j) + 1);
        FitResult fit = fit_pqml(series, w, est.orders[j], cfg.delta);
        SandwichVariance sv = sandwich(series, w, fit.params);
        est.params.push_back(fit.params);
        est.se.push_back(sv.se);
        est.seg_loglik.push_back(fit.loglik);
    }
    est.mdl = mdl(series, est.taus, est.orders, cfg.delta);
    return est;
}

}  // namespace lrsm
