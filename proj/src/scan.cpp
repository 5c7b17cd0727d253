#include "lrsm/scan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace lrsm {

void ScanConfig::validate(index_t n) const {
    if (h.empty()) throw InputError("ScanConfig: no window radius");
    index_t prev = 0;
    for (index_t r : h) {
        if (r <= prev) throw InputError("ScanConfig: radii must be ascending");
        if (r <= p_max) throw InputError("ScanConfig: need h > p_max");
        prev = r;
    }
    if (2 * h.back() >= n) throw InputError("ScanConfig: need 2h < n");
    if (p_max < 1) throw InputError("ScanConfig: p_max < 1");
    if (m_max < 1) throw InputError("ScanConfig: m_max < 1");
    if (fixed_order && (*fixed_order < 1 || *fixed_order > p_max))
        throw InputError("ScanConfig: fixed_order outside [1, p_max]");
}

namespace {

double window_loglik(const CountSeries& series, Window w, const ScanConfig& cfg) {
    if (cfg.fixed_order) return fit_pqml(series, w, *cfg.fixed_order, cfg.delta).loglik;
    return select_order_fit(series, w, cfg.p_max, cfg.order_criterion, cfg.delta).fit.loglik;
}

}  // namespace

double scan_stat(const CountSeries& series, index_t t, index_t h, const ScanConfig& cfg) {
    const index_t n = series.n();
    if (t < h || t > n - h) return 0.0;  // outside the scan range by convention
    double left = window_loglik(series, Window{t - h, h}, cfg);
    double right = window_loglik(series, Window{t, h}, cfg);
    double pooled = window_loglik(series, Window{t - h, 2 * h}, cfg);
    return (left + right - pooled) / static_cast<double>(h);
}

ScanScores scan_series(const CountSeries& series, const ScanConfig& cfg, index_t h) {
    const index_t n = series.n();
    cfg.validate(n);
    if (h == 0) h = cfg.h.front();

    ScanScores out;
    out.h = h;
    out.t_first = h + cfg.p_max + 1;
    const index_t t_last = n - h;
    if (t_last < out.t_first)
        throw InfeasibleError("scan_series: series shorter than 2h + p_max + 1");
    out.scores.assign(static_cast<std::size_t>(t_last - out.t_first + 1), 0.0);

    const bool par = cfg.exec == Exec::Parallel;
    const std::int64_t count = static_cast<std::int64_t>(out.scores.size());
#pragma omp parallel for schedule(dynamic, 8) if (par)
    for (std::int64_t i = 0; i < count; ++i)
        out.scores[static_cast<std::size_t>(i)] =
            scan_stat(series, out.t_first + i, h, cfg);
    return out;
}

ChangePointSet local_maxima(const ScanScores& scores, index_t h, int m_max) {
    const auto& s = scores.scores;
    const std::int64_t n = static_cast<std::int64_t>(s.size());
    if (m_max < 1) throw InputError("local_maxima: m_max < 1");

    // Sliding max over the window (t-h, t+h], i.e. score indices [i-h+1, i+h].
    std::vector<std::int64_t> peaks;
    std::deque<std::int64_t> dq;
    std::int64_t added = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = added; j <= std::min(i + h, n - 1); ++j) {
            while (!dq.empty() && s[static_cast<std::size_t>(dq.back())] <=
                                      s[static_cast<std::size_t>(j)])
                dq.pop_back();
            dq.push_back(j);
            added = j + 1;
        }
        while (dq.front() < i - h + 1) dq.pop_front();
        if (s[static_cast<std::size_t>(i)] == s[static_cast<std::size_t>(dq.front())])
            peaks.push_back(i);
    }

    // Exact ties within h of a kept peak collapse to the smallest index (two
    // peaks within h of each other are necessarily tied).
    std::vector<std::int64_t> kept;
    for (std::int64_t i : peaks)
        if (kept.empty() || i - kept.back() > h) kept.push_back(i);

    // m_max largest scores, ties to the smaller index.
    std::sort(kept.begin(), kept.end(), [&](std::int64_t a, std::int64_t b) {
        double sa = s[static_cast<std::size_t>(a)], sb = s[static_cast<std::size_t>(b)];
        return sa != sb ? sa > sb : a < b;
    });
    if (static_cast<int>(kept.size()) > m_max) kept.resize(static_cast<std::size_t>(m_max));
    std::sort(kept.begin(), kept.end());

    ChangePointSet out;
    for (std::int64_t i : kept) {
        out.taus.push_back(scores.t_of(static_cast<std::size_t>(i)));
        out.scores.push_back(s[static_cast<std::size_t>(i)]);
        out.radii.push_back(h);
    }
    return out;
}

ChangePointSet scan_multi(const CountSeries& series, const ScanConfig& cfg) {
    cfg.validate(series.n());
    ChangePointSet merged;
    for (index_t h : cfg.h) {  // ascending: larger radius overwrites duplicates
        ChangePointSet cand = local_maxima(scan_series(series, cfg, h), h, cfg.m_max);
        for (std::size_t i = 0; i < cand.taus.size(); ++i) {
            auto it = std::lower_bound(merged.taus.begin(), merged.taus.end(), cand.taus[i]);
            std::size_t pos = static_cast<std::size_t>(it - merged.taus.begin());
            if (it != merged.taus.end() && *it == cand.taus[i]) {
                merged.scores[pos] = cand.scores[i];
                merged.radii[pos] = cand.radii[i];
            } else {
                merged.taus.insert(it, cand.taus[i]);
                merged.scores.insert(merged.scores.begin() + static_cast<std::ptrdiff_t>(pos),
                                     cand.scores[i]);
                merged.radii.insert(merged.radii.begin() + static_cast<std::ptrdiff_t>(pos),
                                    cand.radii[i]);
            }
        }
    }
    return merged;
}

index_t default_window(index_t n, double d, WindowRule rule) {
    if (n < 20) throw InputError("default_window: n < 20");
    double raw = d * std::pow(std::log(static_cast<double>(n)), 4) / 25.0;
    double v = rule == WindowRule::Max ? std::max(static_cast<double>(n) / 20.0, raw) : raw;
    return static_cast<index_t>(std::floor(v));
}

std::vector<index_t> default_window_mix(index_t n, const std::vector<double>& ds) {
    if (n < 20) throw InputError("default_window_mix: n < 20");
    double base = std::floor(std::pow(std::log(static_cast<double>(n)), 4) / 25.0);
    std::vector<index_t> out;
    for (double d : ds) out.push_back(static_cast<index_t>(std::ceil(d * base)));
    return out;
}

}  // namespace lrsm
