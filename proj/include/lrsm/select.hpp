#pragma once

#include <vector>

#include "lrsm/exec.hpp"
#include "lrsm/pqml.hpp"
#include "lrsm/series.hpp"

namespace lrsm {

struct SegmentCost {
    double cost = 0.0;  // -loglik + log(p) + ((p+1)/2) log(n_j)
    int order = 0;      // chosen by AIC over feasible p <= p_max
};

// Description-length of a segmentation: log(m) + (m+1) log n
// + sum_j [log(p_j) + ((p_j+1)/2) log(n_j) - L_j], with the log(m) term
// defined as 0 for m = 0. Each segment is re-fitted at its given order.
double mdl(const CountSeries& series, const ChangePointSet& cps, const std::vector<int>& orders,
           double delta = 1e-4);

SegmentCost segment_cost(const CountSeries& series, Window w, int p_max,
                         Criterion criterion = Criterion::AIC, double delta = 1e-4);

struct PartitionResult {
    ChangePointSet selected;   // subset of the candidates (radii carried over)
    std::vector<int> orders;   // per segment of the selected partition
    double objective = 0.0;    // additive DP objective sum_j (cost_j + c), c = log n
    double mdl_value = 0.0;    // full criterion including the log(m) term
    int m_hat() const { return static_cast<int>(selected.taus.size()); }
};

// Exact minimizer over all subsets of `candidates` of the additive objective
// sum_j segment_cost_j + (m+1) log n, via the O(k^2) optimal-partitioning
// dynamic program. Infeasibly short spans get +inf cost and are never chosen.
PartitionResult optimal_partition(const CountSeries& series, const ChangePointSet& candidates,
                                  int p_max, Criterion criterion = Criterion::AIC,
                                  double delta = 1e-4, Exec exec = Exec::Parallel);

}  // namespace lrsm
