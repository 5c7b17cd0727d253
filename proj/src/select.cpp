#include "lrsm/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrsm {

double mdl(const CountSeries& series, const ChangePointSet& cps, const std::vector<int>& orders,
           double delta) {
    const index_t n = series.n();
    cps.validate(n);
    const std::size_t m = cps.taus.size();
    if (orders.size() != m + 1) throw InputError("mdl: need one order per segment");

    double value = (m >= 1 ? std::log(static_cast<double>(m)) : 0.0) +
                   static_cast<double>(m + 1) * std::log(static_cast<double>(n));
    for (std::size_t j = 0; j < m + 1; ++j) {
        Window w = segment_view(series, cps, static_cast<index_t>(j) + 1);
        int p = orders[j];
        if (p < 1) throw InputError("mdl: order < 1");
        if (w.len < p + 2) throw InfeasibleError("mdl: segment shorter than p+2");
        FitResult fit = fit_pqml(series, w, p, delta);
        value += std::log(static_cast<double>(p)) +
                 0.5 * static_cast<double>(p + 1) * std::log(static_cast<double>(w.len)) -
                 fit.loglik;
    }
    return value;
}

SegmentCost segment_cost(const CountSeries& series, Window w, int p_max, Criterion criterion,
                         double delta) {
    OrderFit of = select_order_fit(series, w, p_max, criterion, delta);
    double cost = -of.fit.loglik + std::log(static_cast<double>(of.order)) +
                  0.5 * static_cast<double>(of.order + 1) * std::log(static_cast<double>(w.len));
    return SegmentCost{cost, of.order};
}

PartitionResult optimal_partition(const CountSeries& series, const ChangePointSet& candidates,
                                  int p_max, Criterion criterion, double delta, Exec exec) {
    const index_t n = series.n();
    candidates.validate(n);
    const double c = std::log(static_cast<double>(n));
    const double inf = std::numeric_limits<double>::infinity();

    // Breakpoint grid 0, tau_1, .., tau_K, n.
    std::vector<index_t> grid;
    grid.push_back(0);
    grid.insert(grid.end(), candidates.taus.begin(), candidates.taus.end());
    grid.push_back(n);
    const std::size_t G = grid.size();

    // Cost matrix over spans (grid[q], grid[s]]; infeasible spans get +inf.
    std::vector<double> cost(G * G, inf);
    std::vector<int> order(G * G, 0);
    struct Pair {
        std::size_t q, s;
    };
    std::vector<Pair> pairs;
    for (std::size_t q = 0; q + 1 < G; ++q)
        for (std::size_t s = q + 1; s < G; ++s) pairs.push_back(Pair{q, s});

    const bool par = exec == Exec::Parallel;
    const std::int64_t np = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic) if (par)
    for (std::int64_t i = 0; i < np; ++i) {
        auto [q, s] = pairs[static_cast<std::size_t>(i)];
        Window w{grid[q], grid[s] - grid[q]};
        try {
            SegmentCost sc = segment_cost(series, w, p_max, criterion, delta);
            cost[q * G + s] = sc.cost;
            order[q * G + s] = sc.order;
        } catch (const InfeasibleError&) {
            // span too short for any order; stays +inf
        }
    }

    // F[s] = best additive value with grid[s] as the last breakpoint placed;
    // every segment contributes cost + c, so F[G-1] = sum_j (cost_j + c).
    std::vector<double> F(G, inf);
    std::vector<std::size_t> back(G, 0);
    F[0] = 0.0;
    for (std::size_t s = 1; s < G; ++s)
        for (std::size_t q = 0; q < s; ++q) {
            double v = F[q] + cost[q * G + s] + c;
            if (v < F[s]) {
                F[s] = v;
                back[s] = q;
            }
        }
    if (!std::isfinite(F[G - 1]))
        throw InfeasibleError("optimal_partition: no feasible segmentation");

    std::vector<std::size_t> chain;
    for (std::size_t s = G - 1; s != 0; s = back[s]) chain.push_back(s);
    std::reverse(chain.begin(), chain.end());  // interior breakpoints + final n

    PartitionResult res;
    std::size_t prev = 0;
    for (std::size_t s : chain) {
        res.orders.push_back(order[prev * G + s]);
        if (s != G - 1) {
            res.selected.taus.push_back(grid[s]);
            // carry score/radius annotations from the candidate set
            std::size_t ci = s - 1;
            if (!candidates.scores.empty()) res.selected.scores.push_back(candidates.scores[ci]);
            if (!candidates.radii.empty()) res.selected.radii.push_back(candidates.radii[ci]);
        }
        prev = s;
    }
    res.objective = F[G - 1];
    res.mdl_value = mdl(series, res.selected, res.orders, delta);
    return res;
}

}  // namespace lrsm
