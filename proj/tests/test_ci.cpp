#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "lrsm/ci.hpp"
#include "lrsm/pqml.hpp"
#include "lrsm/simulate.hpp"

using namespace lrsm;
using Catch::Approx;

namespace {

// Per-observation quasi log-likelihood term at 1-based position t of x.
double qll_term(const std::vector<count_t>& x, index_t t, const GcinarParams& th) {
    double xi = th.beta0;
    for (int i = 1; i <= th.order(); ++i)
        xi += th.betas[static_cast<std::size_t>(i - 1)] *
              static_cast<double>(x[static_cast<std::size_t>(t - i - 1)]);
    return static_cast<double>(x[static_cast<std::size_t>(t - 1)]) * std::log(xi) - xi;
}

// Walk value as an explicit partial sum over term differences (no recursion),
// NaN whenever any contributing term lacks its full lag history.
double direct_walk(const std::vector<count_t>& x, index_t half, const GcinarParams& l,
                   const GcinarParams& r, index_t tau) {
    const int pmax = std::max(l.order(), r.order());
    double w = 0.0;
    auto add = [&](index_t t, double sign) {
        if (t <= pmax) {
            w = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        w += sign * (qll_term(x, t, l) - qll_term(x, t, r));
    };
    if (tau > 0)
        for (index_t t = half + 2; t <= half + 1 + tau; ++t) add(t, 1.0);
    else
        for (index_t t = half + 1 + tau; t <= half; ++t) add(t, -1.0);
    return w;
}

McpSpec jump_spec(index_t n, std::vector<index_t> taus, std::vector<SegmentSpec> segs) {
    McpSpec spec;
    spec.n = n;
    spec.taus.taus = std::move(taus);
    spec.segments = std::move(segs);
    return spec;
}

SegmentSpec seg(double beta0, std::vector<double> betas) {
    SegmentSpec s;
    s.params.beta0 = beta0;
    s.params.betas = std::move(betas);
    return s;
}

// Estimate assembled around known change-points with per-segment refits; only
// the fields the interval constructions read are filled in carefully.
LrsmEstimate make_estimate(const CountSeries& s, std::vector<index_t> taus, index_t h,
                           std::vector<int> orders) {
    LrsmEstimate est;
    est.n = s.n();
    est.m_hat = static_cast<int>(taus.size());
    est.taus.taus = taus;
    est.taus.radii.assign(taus.size(), h);
    est.orders = orders;
    index_t lo = 0;
    for (std::size_t j = 0; j <= taus.size(); ++j) {
        const index_t hi = (j == taus.size()) ? s.n() : taus[j];
        FitResult fit = fit_pqml(s, Window{lo, hi - lo}, orders[j]);
        est.params.push_back(fit.params);
        est.se.emplace_back(static_cast<std::size_t>(orders[j]) + 1, 0.0);
        est.seg_loglik.push_back(fit.loglik);
        lo = hi;
    }
    return est;
}

}  // namespace

TEST_CASE("limit cdf matches frozen reference values", "[ci]") {
    const std::pair<double, double> pts[] = {
        {0.5, 0.62712020686336674},  {1.0, 0.69885391241535321}, {2.0, 0.78810430625977858},
        {4.0, 0.88054570923730895},  {7.6873, 0.95000026612853284},
        {10.0, 0.96923657321520859}, {25.0, 0.99794292008676744},
        {100.0, 0.9999999660074312},
    };
    for (auto [a, v] : pts) CHECK(yao_cdf(a) == Approx(v).margin(1e-12));
    CHECK(yao_cdf(500.0) == 1.0);
    CHECK(yao_cdf(1e4) == 1.0);

    double prev = 0.0;
    for (double a = 0.25; a <= 30.0; a += 0.25) {
        const double c = yao_cdf(a);
        CHECK(c > prev);
        prev = c;
    }
    CHECK_THROWS_AS(yao_cdf(0.0), InputError);
    CHECK_THROWS_AS(yao_cdf(-1.0), InputError);
}

TEST_CASE("limit quantile inverts the cdf", "[ci]") {
    CHECK(yao_quantile(0.9) == Approx(4.6963999053276899).margin(1e-6));
    CHECK(yao_quantile(0.95) == Approx(7.6872755462913266).margin(1e-6));
    CHECK(yao_quantile(0.975) == Approx(11.033292445409416).margin(1e-6));
    CHECK(yao_quantile(0.99) == Approx(15.867740281642507).margin(1e-6));
    for (double q : {0.6, 0.8, 0.9, 0.97, 0.999})
        CHECK(yao_cdf(yao_quantile(q)) == Approx(q).margin(1e-9));
    CHECK_THROWS_AS(yao_quantile(0.5), InputError);
    CHECK_THROWS_AS(yao_quantile(1.0), InputError);
    CHECK_THROWS_AS(yao_quantile(0.2), InputError);
}

TEST_CASE("two-sided walk matches a hand-computed example", "[ci]") {
    // half = 2, joined 1-based positions 1..5.
    const std::vector<count_t> x = {1, 2, 0, 3, 1};
    GcinarParams l;
    l.beta0 = 1.0;
    l.betas = {0.5};
    GcinarParams r;
    r.beta0 = 2.0;
    r.betas = {0.1};

    const double d2 = (2 * std::log(1.5) - 1.5) - (2 * std::log(2.1) - 2.1);
    const double d4 = (3 * std::log(1.0) - 1.0) - (3 * std::log(2.0) - 2.0);
    const double d5 = (std::log(2.5) - 2.5) - (std::log(2.3) - 2.3);

    BootstrapWalk walk = bootstrap_walk(x, 2, l, r);
    REQUIRE(walk.w.size() == 5);
    CHECK(std::isnan(walk.w[0]));  // tau = -2 needs the lag of position 1
    CHECK(walk.w[1] == Approx(-d2).margin(1e-12));
    CHECK(walk.w[2] == 0.0);
    CHECK(walk.w[3] == Approx(d4).margin(1e-12));
    CHECK(walk.w[4] == Approx(d4 + d5).margin(1e-12));
    // tau = 1 is excluded (inside the lag margin), -d2 > 0 beats the rest.
    CHECK(walk.tau_tilde == -1);
}

TEST_CASE("walk equals direct partial sums and argmax stays in bounds", "[ci]") {
    Rng rng(909);
    for (int trial = 0; trial < 120; ++trial) {
        const index_t half = 3 + static_cast<index_t>(rng.next_below(6));
        GcinarParams l, r;
        l.beta0 = 0.5 + 2.0 * rng.uniform();
        r.beta0 = 0.5 + 2.0 * rng.uniform();
        const int pl = 1 + static_cast<int>(rng.next_below(3));
        const int pr = 1 + static_cast<int>(rng.next_below(3));
        for (int i = 0; i < pl; ++i) l.betas.push_back(0.25 * rng.uniform());
        for (int i = 0; i < pr; ++i) r.betas.push_back(0.25 * rng.uniform());
        const int pmax = std::max(pl, pr);

        std::vector<count_t> x(static_cast<std::size_t>(2 * half + 1));
        for (auto& v : x) v = static_cast<count_t>(rng.next_below(7));

        BootstrapWalk walk = bootstrap_walk(x, half, l, r);
        REQUIRE(static_cast<index_t>(walk.w.size()) == 2 * half + 1);
        CHECK(walk.w[static_cast<std::size_t>(half)] == 0.0);

        std::vector<index_t> allowed;
        for (index_t tau = -half; tau <= half; ++tau) {
            const double got = walk.w[static_cast<std::size_t>(tau + half)];
            const double want = direct_walk(x, half, l, r, tau);
            if (std::isnan(want)) {
                CHECK(std::isnan(got));
            } else {
                CHECK(got == Approx(want).margin(1e-10));
            }
            const bool lag_ok = tau >= 0 || half + 1 + tau > pmax;
            if (lag_ok && (tau <= 0 || tau > pmax)) allowed.push_back(tau);
        }
        REQUIRE(std::count(allowed.begin(), allowed.end(), walk.tau_tilde) == 1);
        const double best = walk.w[static_cast<std::size_t>(walk.tau_tilde + half)];
        for (index_t tau : allowed)
            CHECK(best >= walk.w[static_cast<std::size_t>(tau + half)] - 1e-12);
    }
}

TEST_CASE("identical segment parameters centre the walk at zero", "[ci]") {
    GcinarParams th;
    th.beta0 = 1.3;
    th.betas = {0.2, 0.1};
    Rng rng(5);
    std::vector<count_t> x(21);
    for (auto& v : x) v = static_cast<count_t>(rng.next_below(5));
    BootstrapWalk walk = bootstrap_walk(x, 10, th, th);
    CHECK(walk.tau_tilde == 0);
    for (double v : walk.w)
        if (std::isfinite(v)) CHECK(v == 0.0);
}

TEST_CASE("walk input validation", "[ci]") {
    GcinarParams th;
    th.beta0 = 1.0;
    th.betas = {0.2};
    std::vector<count_t> x(7, 1);
    CHECK_THROWS_AS(bootstrap_walk(x, 4, th, th), InputError);  // needs length 9
    CHECK_THROWS_AS(bootstrap_walk({1}, 0, th, th), InputError);
    GcinarParams bad = th;
    bad.beta0 = 0.0;
    CHECK_THROWS_AS(bootstrap_walk(x, 3, th, bad), InputError);
}

TEST_CASE("approx interval is symmetric with the quantile half-width", "[ci]") {
    McpSpec spec = jump_spec(600, {300}, {seg(0.5, {0.5}), seg(4.0, {0.2})});
    CountSeries s = simulate_mcp(spec, 500, 41);
    LrsmEstimate est = make_estimate(s, {300}, 54, {1, 2});

    CiResult res = ci_approx(s, est, 1, 0.1);
    CHECK(res.method == CiMethod::Approx);
    CHECK(res.alpha == 0.1);
    REQUIRE(res.delta_hat > 0.0);
    REQUIRE(res.lower >= 1);
    REQUIRE(res.upper <= s.n());
    REQUIRE(res.lower <= res.upper);

    // Recompute the drift ratio from public pieces: parameters padded to the
    // common order, sandwich matrices on the 4h window around the estimate.
    const int p = std::max(est.orders[0], est.orders[1]);
    GcinarParams thl = est.params[0], thr = est.params[1];
    thl.betas.resize(static_cast<std::size_t>(p), 0.0);
    thr.betas.resize(static_cast<std::size_t>(p), 0.0);
    std::vector<double> d = {thl.beta0 - thr.beta0};
    for (int i = 0; i < p; ++i)
        d.push_back(thl.betas[static_cast<std::size_t>(i)] - thr.betas[static_cast<std::size_t>(i)]);
    const index_t k = std::max<index_t>(300 - 2 * 54, 0);
    SandwichVariance sv = sandwich(s, Window{k, std::min<index_t>(4 * 54, s.n() - k)}, thr);
    double dJd = 0.0, dId = 0.0;
    for (int a = 0; a <= p; ++a)
        for (int b = 0; b <= p; ++b) {
            dJd += d[static_cast<std::size_t>(a)] * d[static_cast<std::size_t>(b)] *
                   sv.J[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            dId += d[static_cast<std::size_t>(a)] * d[static_cast<std::size_t>(b)] *
                   sv.I[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
    const double expect = dId / (dJd * dJd);
    CHECK(res.delta_hat == Approx(expect).epsilon(1e-12));

    const auto width = static_cast<index_t>(std::floor(expect * yao_quantile(0.95))) + 1;
    CHECK(res.upper - 300 == width);
    CHECK(300 - res.lower == width);

    // Lower alpha never narrows the interval.
    CiResult tight = ci_approx(s, est, 1, 0.02);
    CiResult loose = ci_approx(s, est, 1, 0.4);
    CHECK(tight.upper - tight.lower >= res.upper - res.lower);
    CHECK(res.upper - res.lower >= loose.upper - loose.lower);
}

TEST_CASE("approx interval input validation", "[ci]") {
    McpSpec spec = jump_spec(400, {200}, {seg(0.5, {0.5}), seg(4.0, {0.2})});
    CountSeries s = simulate_mcp(spec, 500, 9);
    LrsmEstimate est = make_estimate(s, {200}, 40, {1, 1});

    CHECK_THROWS_AS(ci_approx(s, est, 0, 0.1), InputError);
    CHECK_THROWS_AS(ci_approx(s, est, 2, 0.1), InputError);
    CHECK_THROWS_AS(ci_approx(s, est, 1, 0.0), InputError);
    CHECK_THROWS_AS(ci_approx(s, est, 1, 1.0), InputError);

    LrsmEstimate no_radii = est;
    no_radii.taus.radii.clear();
    CHECK_THROWS_AS(ci_approx(s, no_radii, 1, 0.1), InputError);

    // No parameter drift across the split leaves nothing to normalise by.
    LrsmEstimate flat = est;
    flat.params[1] = flat.params[0];
    flat.orders[1] = flat.orders[0];
    CHECK_THROWS_AS(ci_approx(s, flat, 1, 0.1), NumericError);
}

TEST_CASE("parametric bootstrap interval is deterministic and bounded", "[ci]") {
    std::vector<count_t> v(200, 2);
    CountSeries s(std::move(v));
    LrsmEstimate est;
    est.n = 200;
    est.m_hat = 1;
    est.taus.taus = {100};
    est.orders = {1, 1};
    GcinarParams l;
    l.beta0 = 1.0;
    l.betas = {0.3};
    GcinarParams r;
    r.beta0 = 4.0;
    r.betas = {0.2};
    est.params = {l, r};

    CiResult a = pba_ci(s, est, 1, 0.1, 60, 100, 77, Exec::Parallel);
    CiResult b = pba_ci(s, est, 1, 0.1, 60, 100, 77, Exec::Parallel);
    CiResult c = pba_ci(s, est, 1, 0.1, 60, 100, 77, Exec::Serial);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    CHECK(a.lower == c.lower);
    CHECK(a.upper == c.upper);
    CHECK(a.method == CiMethod::PBA);
    CHECK(a.alpha == 0.1);
    CHECK(a.half == 60);
    CHECK(a.draws == 100);
    CHECK(a.lower >= 1);
    CHECK(a.upper <= 200);
    CHECK(a.lower <= 100);  // percentile interval always brackets the estimate
    CHECK(a.upper >= 100);

    // Zero requests the default sampler length n/2.
    CiResult d = pba_ci(s, est, 1, 0.1, 0, 20, 5, Exec::Serial);
    CHECK(d.half == 100);

    // Identical segment laws collapse every draw to offset zero.
    LrsmEstimate flat = est;
    flat.params[1] = flat.params[0];
    CiResult e = pba_ci(s, flat, 1, 0.1, 40, 50, 3, Exec::Serial);
    CHECK(e.lower == 100);
    CHECK(e.upper == 100);

    CHECK_THROWS_AS(pba_ci(s, est, 1, 0.1, 60, 0, 1, Exec::Serial), InputError);
    CHECK_THROWS_AS(pba_ci(s, est, 1, 1.5, 60, 10, 1, Exec::Serial), InputError);
    CHECK_THROWS_AS(pba_ci(s, est, 3, 0.1, 60, 10, 1, Exec::Serial), InputError);
}

TEST_CASE("block bootstrap replicates are verbatim slices", "[ci]") {
    // Position-coded values make the sampled offsets directly readable.
    std::vector<count_t> v(500);
    for (index_t t = 1; t <= 500; ++t) v[static_cast<std::size_t>(t - 1)] = t;
    CountSeries s(std::move(v));
    const index_t seg_lo = 100, tau = 280, seg_hi = 450, n_b = 30;

    Rng rng(2718);
    std::set<count_t> left_starts, right_starts;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<count_t> x = bba_replicate(s, seg_lo, tau, seg_hi, n_b, rng);
        REQUIRE(static_cast<index_t>(x.size()) == 2 * n_b + 1);
        for (index_t i = 1; i <= n_b; ++i) CHECK(x[static_cast<std::size_t>(i)] == x[0] + i);
        for (index_t i = 1; i < n_b; ++i)
            CHECK(x[static_cast<std::size_t>(n_b + 1 + i)] == x[static_cast<std::size_t>(n_b + 1)] + i);
        CHECK(x[0] >= seg_lo + 1);
        CHECK(x[static_cast<std::size_t>(n_b)] <= tau);
        CHECK(x[static_cast<std::size_t>(n_b + 1)] >= tau + 1);
        CHECK(x.back() <= seg_hi);
        left_starts.insert(x[0]);
        right_starts.insert(x[static_cast<std::size_t>(n_b + 1)]);
    }
    CHECK(left_starts.size() > 20);  // block starts actually randomise
    CHECK(right_starts.size() > 20);

    Rng r2(1);
    CHECK_THROWS_AS(bba_replicate(s, seg_lo, tau, seg_hi, 0, r2), InfeasibleError);
    CHECK_THROWS_AS(bba_replicate(s, seg_lo, tau, seg_hi, 170, r2), InfeasibleError);
}

TEST_CASE("block bootstrap interval determinism and bandwidth limits", "[ci]") {
    McpSpec spec = jump_spec(600, {300}, {seg(0.5, {0.5}), seg(4.0, {0.2})});
    CountSeries s = simulate_mcp(spec, 500, 23);
    LrsmEstimate est = make_estimate(s, {300}, 54, {1, 1});

    CiResult a = bba_ci(s, est, 1, 0.1, 40, 100, 99, Exec::Parallel);
    CiResult b = bba_ci(s, est, 1, 0.1, 40, 100, 99, Exec::Parallel);
    CiResult c = bba_ci(s, est, 1, 0.1, 40, 100, 99, Exec::Serial);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    CHECK(a.lower == c.lower);
    CHECK(a.upper == c.upper);
    CHECK(a.method == CiMethod::BBA);
    CHECK(a.half == 40);
    CHECK(a.draws == 100);
    CHECK(a.lower >= 1);
    CHECK(a.upper <= 600);
    CHECK(a.lower <= 300);
    CHECK(a.upper >= 300);

    // Block length must leave room inside both adjacent segments.
    CHECK_THROWS_AS(bba_ci(s, est, 1, 0.1, 300, 10, 1, Exec::Serial), InfeasibleError);
    CHECK_THROWS_AS(bba_ci(s, est, 1, 0.1, 0, 10, 1, Exec::Serial), InfeasibleError);
    CHECK_THROWS_AS(bba_ci(s, est, 1, 0.1, 40, 0, 1, Exec::Serial), InputError);
    CHECK_THROWS_AS(bba_ci(s, est, 2, 0.1, 40, 10, 1, Exec::Serial), InputError);
}

TEST_CASE("adaptive bandwidth search settles under the outer-mass target", "[ci]") {
    McpSpec spec = jump_spec(600, {300}, {seg(0.5, {0.5}), seg(4.0, {0.2})});
    CountSeries s = simulate_mcp(spec, 500, 31);
    LrsmEstimate est = make_estimate(s, {300}, 54, {1, 1});

    AdaptiveBandwidth ab = adaptive_bandwidth(s, est, 1, 0.1, 100, 7, Exec::Parallel);
    CHECK(ab.n_b >= 1);
    CHECK(ab.n_b <= 299);
    if (!ab.capped) CHECK(ab.outer_frac <= 0.05 + 1e-12);

    AdaptiveBandwidth again = adaptive_bandwidth(s, est, 1, 0.1, 100, 7, Exec::Serial);
    CHECK(ab.n_b == again.n_b);
    CHECK(ab.outer_frac == again.outer_frac);
    CHECK(ab.capped == again.capped);

    // The chosen bandwidth must be feasible for the block construction.
    CiResult res = bba_ci(s, est, 1, 0.1, ab.n_b, 100, 7, Exec::Parallel);
    CHECK(res.half == ab.n_b);
}

TEST_CASE("simultaneous intervals split the error rate across change-points", "[ci]") {
    McpSpec spec = jump_spec(900, {300, 600},
                             {seg(0.5, {0.5}), seg(4.0, {0.2}), seg(1.0, {0.6})});
    CountSeries s = simulate_mcp(spec, 500, 13);
    LrsmEstimate est = make_estimate(s, {300, 600}, 54, {1, 1, 1});

    CiOptions opt;
    opt.alpha = 0.1;
    std::vector<CiResult> res = simultaneous_ci(s, est, CiMethod::Approx, opt);
    REQUIRE(res.size() == 2);
    const double per = 1.0 - std::pow(0.9, 0.5);
    for (const CiResult& r : res) {
        CHECK(r.method == CiMethod::Approx);
        CHECK(r.alpha == Approx(per).margin(1e-15));
    }
    CHECK(res[0].lower <= 300);
    CHECK(res[0].upper >= 300);
    CHECK(res[1].lower <= 600);
    CHECK(res[1].upper >= 600);
    // Per-point level is stricter than the family level, so each marginal
    // interval is at least as wide as its own 90% interval.
    CHECK(res[0].upper - res[0].lower >=
          ci_approx(s, est, 1, 0.1).upper - ci_approx(s, est, 1, 0.1).lower);

    opt.B = 60;
    opt.n_p = 50;
    opt.seed = 4;
    std::vector<CiResult> p1 = simultaneous_ci(s, est, CiMethod::PBA, opt);
    std::vector<CiResult> p2 = simultaneous_ci(s, est, CiMethod::PBA, opt);
    REQUIRE(p1.size() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(p1[j].lower == p2[j].lower);
        CHECK(p1[j].upper == p2[j].upper);
        CHECK(p1[j].method == CiMethod::PBA);
    }

    opt.n_b = 40;
    std::vector<CiResult> bb = simultaneous_ci(s, est, CiMethod::BBA, opt);
    REQUIRE(bb.size() == 2);
    CHECK(bb[0].half == 40);
    CHECK(bb[1].half == 40);

    LrsmEstimate none;
    none.n = 900;
    none.m_hat = 0;
    CHECK_THROWS_AS(simultaneous_ci(s, none, CiMethod::Approx, opt), InputError);
}
