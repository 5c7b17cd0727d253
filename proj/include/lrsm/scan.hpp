#pragma once

#include <optional>
#include <vector>

#include "lrsm/exec.hpp"
#include "lrsm/pqml.hpp"
#include "lrsm/series.hpp"

namespace lrsm {

struct ScanConfig {
    std::vector<index_t> h;     // one or more window radii, ascending
    int p_max = 5;
    int m_max = 30;
    Criterion order_criterion = Criterion::AIC;
    double delta = 1e-4;
    std::optional<int> fixed_order;  // test knob: force a common order on all three fits
    Exec exec = Exec::Parallel;

    index_t h_max() const { return h.empty() ? 0 : h.back(); }
    void validate(index_t n) const;
};

// Scores over the evaluated grid t = h+p_max+1 .. n-h (the first t where all
// three windows have fully lagged interiors, per the range arithmetic in the
// contract); t_first records the grid origin.
struct ScanScores {
    index_t t_first = 0;
    index_t h = 0;
    std::vector<double> scores;

    index_t t_of(std::size_t i) const { return t_first + static_cast<index_t>(i); }
    index_t t_last() const { return t_first + static_cast<index_t>(scores.size()) - 1; }
};

// S_h(t) = (1/h)[L(left fit) + L(right fit) - L(pooled fit)], each fit with
// its own selected order. Defined as 0 outside h <= t <= n-h.
double scan_stat(const CountSeries& series, index_t t, index_t h, const ScanConfig& cfg);

ScanScores scan_series(const CountSeries& series, const ScanConfig& cfg, index_t h = 0);

// Candidate set: t whose score equals the max over (t-h, t+h], deduplicated
// so exact ties within h keep the smallest index, then truncated to the m_max
// largest scores (ties by smaller index). Sorted ascending on return.
ChangePointSet local_maxima(const ScanScores& scores, index_t h, int m_max);

// Union of per-radius candidate sets; duplicates (exact index) keep the
// largest producing radius.
ChangePointSet scan_multi(const CountSeries& series, const ScanConfig& cfg);

enum class WindowRule { Max, Raw };

// floor(max(n/20, d (ln n)^4 / 25)) for Max, floor(d (ln n)^4 / 25) for Raw.
index_t default_window(index_t n, double d, WindowRule rule);

// Radius grid h_i = ceil(d_i * floor((ln n)^4 / 25)); with the stock
// d = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2} this reproduces the reference mixed-
// radius grids (e.g. n=2000 -> {27,54,80,107,133,160}).
std::vector<index_t> default_window_mix(index_t n, const std::vector<double>& ds = {
                                            0.2, 0.4, 0.6, 0.8, 1.0, 1.2});

}  // namespace lrsm
