#pragma once

#include "lrsm/scan.hpp"
#include "lrsm/select.hpp"

namespace lrsm {

// Exhaustive step-3 refinement of one change-point inside (tau2-h, tau2+h].
// Both sides are re-fit for every candidate split of the extended window
// (ext_lo, ext_hi]; ties go to the smallest tau.  Pass ext_lo/ext_hi < 0 to
// use the default tau2 +/- 2h clamped to the series; callers with neighbours
// truncate at midpoints so ranges never cross.
index_t refine_changepoint(const CountSeries& series, index_t tau2, int p_left, int p_right,
                           index_t h, index_t ext_lo = -1, index_t ext_hi = -1,
                           double delta = 1e-4);

// Full three-step pipeline: scan at all configured radii, optimal partition
// over the pooled candidates, per-change-point refinement, then final
// segment fits (orders frozen from step 2) with sandwich standard errors.
LrsmEstimate lrsm_detect(const CountSeries& series, const ScanConfig& cfg);

}  // namespace lrsm
