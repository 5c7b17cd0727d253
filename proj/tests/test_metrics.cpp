#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lrsm/metrics.hpp"
#include "lrsm/rng.hpp"

using namespace lrsm;
using Catch::Approx;

namespace {

GcinarParams params(double beta0, std::vector<double> betas) {
    GcinarParams p;
    p.beta0 = beta0;
    p.betas = std::move(betas);
    return p;
}

// Two-segment estimate over the shared toy series (change after position 5).
LrsmEstimate toy_estimate() {
    LrsmEstimate est;
    est.n = 10;
    est.m_hat = 1;
    est.taus.taus = {5};
    est.orders = {1, 2};
    est.params = {params(1.5, {0.4}), params(2.0, {0.1, 0.2})};
    return est;
}

const std::vector<count_t> kToy = {2, 3, 1, 4, 2, 5, 3, 2, 4, 3};

}  // namespace

TEST_CASE("true positive rate counts exact matches", "[metrics]") {
    CHECK(tpr({2, 2, 1, 2, 3}, 2) == Approx(0.6));
    CHECK(tpr({0, 0}, 1) == 0.0);
    CHECK(tpr({4}, 4) == 1.0);
    CHECK_THROWS_AS(tpr({}, 1), InputError);
}

TEST_CASE("distance metrics match hand-computed values", "[metrics]") {
    Zeta z = zeta_metrics({0.1, 0.2, 0.15}, {0.25, 0.5, 0.75});
    CHECK(z.under == Approx(0.15).margin(1e-15));
    CHECK(z.over == Approx(0.55).margin(1e-15));
    CHECK(z.dist == Approx(0.3).margin(1e-15));

    z = zeta_metrics({0.24, 0.51, 0.9}, {0.25, 0.5, 0.75});
    CHECK(z.under == Approx(0.15).margin(1e-15));
    CHECK(z.over == Approx(0.15).margin(1e-15));
    CHECK(z.dist == Approx(0.05666666666666668).margin(1e-15));

    z = zeta_metrics({0.5}, {0.25, 0.5, 0.75});
    CHECK(z.under == 0.0);
    CHECK(z.over == Approx(0.25).margin(1e-15));
    CHECK(z.dist == Approx(1.0 / 6.0).margin(1e-15));

    // No detections: worst case by convention.
    z = zeta_metrics({}, {0.3, 0.6});
    CHECK(z.under == 0.0);
    CHECK(z.over == 1.0);
    CHECK(z.dist == 1.0);

    CHECK_THROWS_AS(zeta_metrics({0.5}, {}), InputError);
    CHECK_THROWS_AS(zeta_metrics({0.0}, {0.5}), InputError);
    CHECK_THROWS_AS(zeta_metrics({0.5}, {1.0}), InputError);
    CHECK_THROWS_AS(zeta_metrics({-0.1}, {0.5}), InputError);
}

TEST_CASE("under- and over-segmentation distances are dual", "[metrics]") {
    Rng rng(321);
    auto draw = [&](std::size_t k) {
        std::vector<double> v(k);
        for (auto& x : v) x = static_cast<double>(1 + rng.next_below(98)) / 100.0;
        return v;
    };
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<double> a = draw(1 + rng.next_below(5));
        std::vector<double> b = draw(1 + rng.next_below(5));
        CHECK(zeta_metrics(a, b).under == zeta_metrics(b, a).over);
        CHECK(zeta_metrics(a, b).over == zeta_metrics(b, a).under);
    }
}

TEST_CASE("fitted means follow the segment laws across the split", "[metrics]") {
    CountSeries s(kToy);
    std::vector<double> xi = fitted_means(s, toy_estimate());
    REQUIRE(xi.size() == 10);
    CHECK(std::isnan(xi[0]));  // no lag available at t = 1
    for (index_t t = 2; t <= 5; ++t)
        CHECK(xi[static_cast<std::size_t>(t - 1)] ==
              Approx(1.5 + 0.4 * static_cast<double>(kToy[static_cast<std::size_t>(t - 2)]))
                  .margin(1e-15));
    // Second segment's lags reach back across the change-point.
    CHECK(xi[5] == Approx(2.0 + 0.1 * 2 + 0.2 * 4).margin(1e-15));
    for (index_t t = 7; t <= 10; ++t)
        CHECK(xi[static_cast<std::size_t>(t - 1)] ==
              Approx(2.0 + 0.1 * static_cast<double>(kToy[static_cast<std::size_t>(t - 2)]) +
                     0.2 * static_cast<double>(kToy[static_cast<std::size_t>(t - 3)]))
                  .margin(1e-15));

    LrsmEstimate wrong = toy_estimate();
    wrong.n = 9;
    CHECK_THROWS_AS(fitted_means(s, wrong), InputError);
}

TEST_CASE("pearson residuals match frozen single-segment values", "[metrics]") {
    CountSeries s(kToy);
    LrsmEstimate est;
    est.n = 10;
    est.m_hat = 0;
    est.orders = {1};
    est.params = {params(1.5, {0.4})};

    std::vector<double> r = pearson_residuals(s, est);
    REQUIRE(r.size() == 9);  // t = 2..10
    CHECK(r[0] == Approx(0.46156633137705105).margin(1e-12));
    CHECK(r[1] == Approx(-1.0345870530653138).margin(1e-12));
    CHECK(r[2] == Approx(1.5235001252310247).margin(1e-12));

    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= static_cast<double>(r.size() - 1);
    CHECK(mean == Approx(0.2752146233177994).margin(1e-12));
    CHECK(var == Approx(0.9994155095933916).margin(1e-12));

    CHECK(rms(s, est) == Approx(1.4881009523699813).margin(1e-12));
}

TEST_CASE("rms skips positions without fitted means", "[metrics]") {
    // Order-3 fit leaves t = 2,3 without means; they must not contribute.
    std::vector<count_t> v = {1, 2, 3, 2, 1, 2, 3, 2};
    CountSeries s(v);
    LrsmEstimate est;
    est.n = 8;
    est.m_hat = 0;
    est.orders = {3};
    est.params = {params(1.0, {0.1, 0.1, 0.1})};

    std::vector<double> xi = fitted_means(s, est);
    double sum = 0.0;
    for (index_t t = 4; t <= 8; ++t) {
        const double d = static_cast<double>(s.at(t)) - xi[static_cast<std::size_t>(t - 1)];
        sum += d * d;
    }
    CHECK(rms(s, est) == Approx(std::sqrt(sum / 7.0)).margin(1e-14));

    CountSeries one(std::vector<count_t>{3});
    LrsmEstimate e1;
    e1.n = 1;
    e1.m_hat = 0;
    e1.orders = {1};
    e1.params = {params(1.0, {0.1})};
    CHECK_THROWS_AS(rms(one, e1), InputError);
}

TEST_CASE("regularized upper gamma matches reference values", "[metrics]") {
    CHECK(gamma_q(0.5, 1.0) == Approx(0.15729920705028105).margin(1e-12));
    CHECK(gamma_q(1.0, 1.0) == Approx(0.36787944117144245).margin(1e-12));
    CHECK(gamma_q(2.5, 0.7) == Approx(0.924313272801667).margin(1e-12));
    CHECK(gamma_q(3.0, 9.0) == Approx(0.006232195106377317).margin(1e-12));
    CHECK(gamma_q(10.0, 3.0) == Approx(0.9988975118698845).margin(1e-12));
    CHECK(gamma_q(2.0, 0.0) == 1.0);

    double prev = 1.0;
    for (double x = 0.5; x <= 12.0; x += 0.5) {
        const double g = gamma_q(3.0, x);
        CHECK(g < prev);
        prev = g;
    }
    CHECK_THROWS_AS(gamma_q(0.0, 1.0), InputError);
    CHECK_THROWS_AS(gamma_q(1.0, -0.5), InputError);
}

TEST_CASE("chi-square tail matches reference values", "[metrics]") {
    CHECK(chi2_upper_tail(3.84, 1) == Approx(0.05004352124870519).margin(1e-12));
    CHECK(chi2_upper_tail(5.99, 2) == Approx(0.05003662708658629).margin(1e-12));
    CHECK(chi2_upper_tail(1.0, 3) == Approx(0.8012519569012009).margin(1e-12));
    CHECK(chi2_upper_tail(27.5, 10) == Approx(0.002169477405398883).margin(1e-12));
}

TEST_CASE("portmanteau statistics match a frozen residual sequence", "[metrics]") {
    const std::vector<double> e = {1.2, -0.3, 0.5,  -1.1, 0.8, 0.4,  -0.9, 1.5,  -0.2, 0.1,
                                   -1.3, 0.7, 0.6,  -0.5, 1.0, -0.8, 0.3,  -0.6, 1.1,  -0.4};
    std::vector<LjungBox> lb = ljung_box(e, 4);
    REQUIRE(lb.size() == 4);
    const double stats[] = {7.870333682164447, 8.840224741963358, 9.69239049638108,
                            9.736683647104414};
    const double pvals[] = {0.005025237918468819, 0.012032880062204898, 0.02137031968213367,
                            0.04510465995669703};
    for (int k = 0; k < 4; ++k) {
        CHECK(lb[static_cast<std::size_t>(k)].lag == k + 1);
        CHECK(lb[static_cast<std::size_t>(k)].stat == Approx(stats[k]).margin(1e-10));
        CHECK(lb[static_cast<std::size_t>(k)].p_value == Approx(pvals[k]).margin(1e-10));
    }

    CHECK_THROWS_AS(ljung_box(std::vector<double>(20, 1.0), 3), NumericError);
    CHECK_THROWS_AS(ljung_box(e, 0), InputError);
    CHECK_THROWS_AS(ljung_box(std::vector<double>{1.0, 2.0, 3.0}, 2), InputError);
}

TEST_CASE("interval coverage counts hits", "[metrics]") {
    auto ci = [](index_t lo, index_t hi) {
        CiResult r;
        r.lower = lo;
        r.upper = hi;
        return r;
    };
    std::vector<CiResult> cis = {ci(90, 110), ci(101, 120), ci(95, 99)};
    CHECK(coverage(cis, 100) == Approx(1.0 / 3.0));
    CHECK(coverage(cis, 99) == Approx(2.0 / 3.0));
    CHECK(coverage(cis, 130) == 0.0);
    CHECK_THROWS_AS(coverage({}, 5), InputError);
}
