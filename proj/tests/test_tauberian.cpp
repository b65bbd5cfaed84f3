#include "doctest.h"

#include "crit4/tauberian.hpp"

#include <cmath>

using namespace crit4::tauberian;

TEST_CASE("band check") {
    BandSpec spec{1, 2, 10, 0.01};
    auto e = band_check(SampleableLaw::exponential(), spec, 32);
    CHECK(e.pass);
    CHECK(e.margin == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(band_check(SampleableLaw::zero(), spec, 32).pass);
    // 0.95 Exp(1) + 0.05 Exp(mean 2): the MGF diverges for lambda >= 1/2
    auto mix = SampleableLaw::mixture({{0.95, 1, 1}, {0.05, 1, 2}});
    auto m = band_check(mix, BandSpec{1, 2, 10, 0.2}, 32);
    CHECK_FALSE(m.pass);
    CHECK(std::isinf(m.margin));
    CHECK(mix.mgf(0.3) == doctest::Approx(0.95 / 0.7 + 0.05 / 0.4));
    CHECK_THROWS(band_check(SampleableLaw::exponential(), BandSpec{2, 1, 10, 0.1}, 8));
}

TEST_CASE("empirical band check for a sampler-only law") {
    auto law = SampleableLaw::opaque([](std::uint64_t seed, std::uint64_t i) {
        return SampleableLaw::exponential().sample(seed, i);
    });
    auto r = band_check(law, BandSpec{1, 2, 4, 0.5}, 8, 200000, 3);
    CHECK_FALSE(r.unverifiable);
    CHECK(r.pass);
    auto hard = band_check(law, BandSpec{1, 2, 1000, 0.5}, 8, 20000, 3);
    CHECK(hard.unverifiable);
}

TEST_CASE("lower bound formula") {
    CHECK(lower_bound(0.5, {1, 2, 10, 0.1}) == doctest::Approx(0.5 * std::exp(-15.0)));
    CHECK_THROWS(lower_bound(1.0, {1, 2, 10, 0.1}));
    double prev = INFINITY;
    for (double T = 2; T < 30; T += 1) {
        double b = lower_bound(0.5, {1, 1.5, T, 0.1});
        CHECK(b < prev);
        prev = b;
    }
    auto ex = SampleableLaw::exponential();
    for (double d : {0.1, 0.5, 1.0}) CHECK(ex.interval_probability(5, 15) > lower_bound(0.5, {1, 2, 10, d}));
}

TEST_CASE("window probability of the exponential law") {
    auto ex = SampleableLaw::exponential();
    for (double y : {3.0, 10.0, 25.0})
        for (double a : {0.1, 0.7}) {
            double ref = (1 - std::exp(-2 * a)) * std::exp(-y + a);
            CHECK(std::abs(ex.interval_probability(y - a, y + a) / ref - 1) <= 1e-12);
        }
}

TEST_CASE("tilt") {
    auto ex = SampleableLaw::exponential();
    for (double s : {0.0, 0.3, 0.9}) {
        auto z = tilt(ex, s);
        REQUIRE(z.parts().size() == 1);
        CHECK(z.parts()[0].scale == doctest::Approx(1.0));
        for (double l : {-1.0, 0.2, 0.7}) CHECK(z.mgf(l) == doctest::Approx(ex.mgf(s + (1 - s) * l) / ex.mgf(s)));
    }
    auto mix = SampleableLaw::mixture({{0.5, 2, 0.5}, {0.3, 1, 1.5}, {0.2, 0, 1}});
    double s1 = 0.2, s2 = 0.3;
    auto twice = tilt(tilt(mix, s1), s2), once = tilt(mix, s1 + (1 - s1) * s2);
    for (size_t i = 0; i < once.parts().size(); ++i) {
        CHECK(twice.parts()[i].weight == doctest::Approx(once.parts()[i].weight));
        CHECK(twice.parts()[i].scale == doctest::Approx(once.parts()[i].scale));
    }
    CHECK_THROWS(tilt(mix, 0.7));  // 0.7 * 1.5 > 1
    auto z = tilt(ex, 0.6);
    double s = 0, s2v = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double v = z.sample(8, i);
        s += v;
        s2v += v * v;
    }
    double m = s / n, se = std::sqrt((s2v / n - m * m) / n);
    CHECK(std::abs(m - 1) <= 3 * se);
}

TEST_CASE("theorem verification") {
    auto ex = SampleableLaw::exponential();
    auto r = verify_theorem(ex, 0.3, {0.5, 1.5, 5, 0.5}, 200000, 1);
    CHECK(r.method == "direct");
    CHECK(r.pass);
    REQUIRE(r.exact);
    CHECK(*r.exact == doctest::Approx(std::exp(-3.5) - std::exp(-6.5)));
    CHECK(r.bound == doctest::Approx(0.5 * 0.3 * 5 * std::exp(-6.5)));
    CHECK(r.ci_low <= *r.exact);
    CHECK(r.ci_high >= *r.exact);

    auto t = verify_theorem(ex, 0.1, {0.5, 1.5, 30, 0.5}, 200000, 2);
    CHECK(t.method == "tilted");
    CHECK(t.pass);
    CHECK(std::abs(t.estimate / *t.exact - 1) < 0.02);

    auto bad = SampleableLaw::mixture({{0.5, 1, 1}, {0.5, 0, 1}});
    CHECK_THROWS_AS(verify_theorem(bad, 0.3, {0.5, 1.5, 5, 0.5}, 1000, 1), BandViolation);
}

TEST_CASE("delta search") {
    auto d = delta_search(SampleableLaw::exponential(), 0.3, 0.5, 1.5, {5, 8}, 100000, 1);
    REQUIRE(d);
    CHECK(*d > 0.5);
    auto r = verify_theorem(SampleableLaw::exponential(), 0.3, {0.5, 1.5, 5, *d}, 100000, 1);
    CHECK(r.pass);
}
