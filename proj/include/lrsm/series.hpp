#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lrsm/errors.hpp"

namespace lrsm {

using index_t = std::int64_t;
using count_t = std::int64_t;

// Immutable sequence of non-negative counts. Positions are 1-based in the
// public API (matching the usual time-series convention); storage is 0-based.
class CountSeries {
public:
    CountSeries() = default;
    explicit CountSeries(std::vector<count_t> values) : values_(std::move(values)) {
        for (count_t v : values_)
            if (v < 0) throw InputError("CountSeries: negative value");
        if (values_.empty()) throw InputError("CountSeries: empty series");
    }

    index_t n() const { return static_cast<index_t>(values_.size()); }
    count_t at(index_t pos) const { return values_[static_cast<std::size_t>(pos - 1)]; }
    const std::vector<count_t>& values() const { return values_; }

private:
    std::vector<count_t> values_;
};

// One segment's parameter vector theta = (beta0, beta1..betap) constrained to
// beta0 in [delta, 1/delta], beta_i in [0, 1-delta], sum(beta_i) <= 1-delta.
struct GcinarParams {
    double beta0 = 0.0;
    std::vector<double> betas;
    double delta = 1e-4;

    int order() const { return static_cast<int>(betas.size()); }
    double beta_sum() const {
        double s = 0.0;
        for (double b : betas) s += b;
        return s;
    }

    void validate() const {
        if (delta <= 0.0 || delta >= 1.0) throw InputError("GcinarParams: delta outside (0,1)");
        if (betas.empty()) throw InputError("GcinarParams: order must be >= 1");
        if (beta0 < delta || beta0 > 1.0 / delta)
            throw InputError("GcinarParams: beta0 outside [delta, 1/delta]");
        for (double b : betas)
            if (b < 0.0 || b > 1.0 - delta)
                throw InputError("GcinarParams: beta_i outside [0, 1-delta]");
        if (beta_sum() > 1.0 - delta)
            throw InputError("GcinarParams: sum of betas exceeds 1-delta");
    }
};

// Observation window X_{k+1}..X_{k+len}; k is the exclusive left anchor.
struct Window {
    index_t k = 0;
    index_t len = 0;

    index_t first() const { return k + 1; }
    index_t last() const { return k + len; }
};

struct ChangePointSet {
    std::vector<index_t> taus;            // strictly increasing, interior
    std::vector<double> scores;           // optional, parallel to taus
    std::vector<index_t> radii;           // optional, scan radius per candidate

    index_t size() const { return static_cast<index_t>(taus.size()); }
    bool empty() const { return taus.empty(); }

    void validate(index_t n) const {
        index_t prev = 0;
        for (index_t t : taus) {
            if (t < 1 || t > n - 1) throw InputError("ChangePointSet: tau outside [1, n-1]");
            if (t <= prev) throw InputError("ChangePointSet: taus not strictly increasing");
            prev = t;
        }
        if (!scores.empty() && scores.size() != taus.size())
            throw InputError("ChangePointSet: scores length mismatch");
        if (!radii.empty() && radii.size() != taus.size())
            throw InputError("ChangePointSet: radii length mismatch");
    }
};

// Full pipeline output. params/orders/se have m_hat+1 entries (one per
// segment); stage traces keep the candidate and selected sets for audit.
struct LrsmEstimate {
    index_t n = 0;
    int m_hat = 0;
    ChangePointSet taus;                  // final refined locations
    std::vector<int> orders;              // per segment
    std::vector<GcinarParams> params;     // per segment, fitted on final partition
    std::vector<std::vector<double>> se;  // per segment, sandwich standard errors
    std::vector<double> seg_loglik;       // per segment quasi-log-likelihood
    double mdl = 0.0;
    ChangePointSet stage1;                // candidate set from the scan
    ChangePointSet stage2;                // selected set from optimal partitioning
};

// Window over segment j (1-based) of the partition induced by cps, with
// tau_0 = 0 and tau_{m+1} = n.
inline Window segment_view(const CountSeries& series, const ChangePointSet& cps, index_t j) {
    index_t m = cps.size();
    if (j < 1 || j > m + 1) throw InputError("segment_view: segment index out of range");
    index_t lo = (j == 1) ? 0 : cps.taus[static_cast<std::size_t>(j - 2)];
    index_t hi = (j == m + 1) ? series.n() : cps.taus[static_cast<std::size_t>(j - 1)];
    return Window{lo, hi - lo};
}

}  // namespace lrsm
