#include <catch2/catch_amalgamated.hpp>

#include "lrsm/series.hpp"

using namespace lrsm;

TEST_CASE("CountSeries basics", "[series]") {
    CountSeries s({3, 0, 7, 2});
    REQUIRE(s.n() == 4);
    REQUIRE(s.at(1) == 3);
    REQUIRE(s.at(4) == 2);
    REQUIRE(s.values().size() == 4);

    REQUIRE_THROWS_AS(CountSeries(std::vector<count_t>{}), InputError);
    REQUIRE_THROWS_AS(CountSeries({1, -2, 3}), InputError);
}

TEST_CASE("GcinarParams validation", "[series]") {
    GcinarParams p;
    p.beta0 = 1.5;
    p.betas = {0.3, 0.2};
    REQUIRE_NOTHROW(p.validate());
    REQUIRE(p.order() == 2);
    REQUIRE(p.beta_sum() == Catch::Approx(0.5));

    GcinarParams bad = p;
    bad.betas.clear();
    REQUIRE_THROWS_AS(bad.validate(), InputError);

    bad = p;
    bad.beta0 = 0.0;  // below delta
    REQUIRE_THROWS_AS(bad.validate(), InputError);

    bad = p;
    bad.beta0 = 2e4;  // above 1/delta
    REQUIRE_THROWS_AS(bad.validate(), InputError);

    bad = p;
    bad.betas = {-0.1};
    REQUIRE_THROWS_AS(bad.validate(), InputError);

    bad = p;
    bad.betas = {0.6, 0.5};  // sum > 1 - delta
    REQUIRE_THROWS_AS(bad.validate(), InputError);

    bad = p;
    bad.delta = 1.0;
    REQUIRE_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("Window endpoints", "[series]") {
    Window w{5, 10};
    REQUIRE(w.first() == 6);
    REQUIRE(w.last() == 15);
}

TEST_CASE("ChangePointSet validation", "[series]") {
    ChangePointSet cps;
    cps.taus = {3, 7};
    REQUIRE_NOTHROW(cps.validate(10));
    REQUIRE(cps.size() == 2);
    REQUIRE_FALSE(cps.empty());

    ChangePointSet bad = cps;
    bad.taus = {3, 3};
    REQUIRE_THROWS_AS(bad.validate(10), InputError);

    bad.taus = {0, 5};
    REQUIRE_THROWS_AS(bad.validate(10), InputError);

    bad.taus = {3, 10};  // n-1 is the last interior position
    REQUIRE_THROWS_AS(bad.validate(10), InputError);

    bad = cps;
    bad.scores = {1.0};
    REQUIRE_THROWS_AS(bad.validate(10), InputError);

    bad = cps;
    bad.radii = {4, 4, 4};
    REQUIRE_THROWS_AS(bad.validate(10), InputError);
}

TEST_CASE("segment_view covers the partition", "[series]") {
    CountSeries s({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    ChangePointSet cps;
    cps.taus = {3, 7};

    Window w1 = segment_view(s, cps, 1);
    REQUIRE(w1.k == 0);
    REQUIRE(w1.len == 3);
    Window w2 = segment_view(s, cps, 2);
    REQUIRE(w2.k == 3);
    REQUIRE(w2.len == 4);
    Window w3 = segment_view(s, cps, 3);
    REQUIRE(w3.k == 7);
    REQUIRE(w3.len == 3);
    REQUIRE(w1.len + w2.len + w3.len == s.n());

    REQUIRE_THROWS_AS(segment_view(s, cps, 0), InputError);
    REQUIRE_THROWS_AS(segment_view(s, cps, 4), InputError);

    // no change-points: one segment spanning everything
    ChangePointSet none;
    Window all = segment_view(s, none, 1);
    REQUIRE(all.k == 0);
    REQUIRE(all.len == 10);
}
