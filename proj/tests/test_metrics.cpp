#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ftmloc/metrics.hpp"
#include "ftmloc/rng.hpp"

using namespace ftmloc;

TEST_CASE("coordinate errors on exact and offset estimates") {
    std::map<std::string, Vec2> truth = {{"u1", Vec2(2.0, 3.0)}, {"u2", Vec2(8.0, 1.0)}};

    const ErrorStats perfect = coord_errors(truth, truth);
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.max == 0.0);

    std::map<std::string, Vec2> single = {{"u1", Vec2(2.0, 3.0) + Vec2(3.0, 4.0)}};
    std::map<std::string, Vec2> single_truth = {{"u1", Vec2(2.0, 3.0)}};
    const ErrorStats one = coord_errors(single, single_truth);
    CHECK(one.mae == doctest::Approx(5.0));
    CHECK(one.rmse == doctest::Approx(5.0));
    CHECK(one.max == doctest::Approx(5.0));

    // One AP exact, one off by (3,4): mae 2.5, rmse sqrt(12.5), max 5.
    std::map<std::string, Vec2> est = truth;
    est["u2"] += Vec2(3.0, 4.0);
    const ErrorStats two = coord_errors(est, truth);
    CHECK(two.mae == doctest::Approx(2.5));
    CHECK(two.rmse == doctest::Approx(std::sqrt(12.5)));
    CHECK(two.max == doctest::Approx(5.0));

    std::map<std::string, Vec2> wrong = {{"u1", Vec2(0, 0)}, {"u3", Vec2(0, 0)}};
    CHECK_THROWS_AS((void)coord_errors(wrong, truth), KeyMismatch);
}

TEST_CASE("ranging errors and their cdf") {
    const RangingErrors exact = ranging_errors({{5.0, 5.0}, {7.0, 7.0}});
    CHECK(exact.stats.mae == 0.0);
    REQUIRE(exact.cdf.size() == 2);
    CHECK(exact.cdf.back().first == 0.0);
    CHECK(exact.cdf.back().second == 1.0);

    // Errors {1, 3}: mae 2, rmse sqrt(5), cdf (1, 0.5), (3, 1.0).
    const RangingErrors two = ranging_errors({{6.0, 5.0}, {4.0, 7.0}});
    CHECK(two.stats.mae == doctest::Approx(2.0));
    CHECK(two.stats.rmse == doctest::Approx(std::sqrt(5.0)));
    REQUIRE(two.cdf.size() == 2);
    CHECK(two.cdf[0] == std::pair<double, double>(1.0, 0.5));
    CHECK(two.cdf[1] == std::pair<double, double>(3.0, 1.0));

    // Duplicating a sample keeps the mean of identical values.
    const RangingErrors dup = ranging_errors({{6.0, 5.0}, {6.0, 5.0}});
    CHECK(dup.stats.mae == doctest::Approx(1.0));

    CHECK_THROWS_AS((void)ranging_errors({}), EmptyInput);
}

TEST_CASE("positioning errors over a fix series") {
    FixSeries fixes;
    for (int i = 0; i < 3; ++i) {
        FixEntry e;
        e.step = i;
        e.estimate = Vec2(i, 0.0);
        fixes.entries.push_back(e);
    }
    std::vector<Vec2> truth = {{0, 0}, {1, 0}, {2, 0}};
    const PositioningErrors exact = positioning_errors(fixes, truth);
    CHECK(exact.stats.mae == 0.0);
    CHECK(exact.stats.max == 0.0);

    // Constant 1 m offset.
    std::vector<Vec2> shifted = {{0, 1}, {1, 1}, {2, 1}};
    const PositioningErrors off = positioning_errors(fixes, shifted);
    CHECK(off.stats.mae == doctest::Approx(1.0));
    CHECK(off.stats.rmse == doctest::Approx(1.0));
    CHECK(off.stats.max == doctest::Approx(1.0));

    // Errors {0, 0, 2}: mae 2/3, rmse sqrt(4/3), max 2.
    std::vector<Vec2> mixed = {{0, 0}, {1, 0}, {2, 2}};
    const PositioningErrors stats = positioning_errors(fixes, mixed);
    CHECK(stats.stats.mae == doctest::Approx(2.0 / 3.0));
    CHECK(stats.stats.rmse == doctest::Approx(std::sqrt(4.0 / 3.0)));
    CHECK(stats.stats.max == doctest::Approx(2.0));

    truth.pop_back();
    CHECK_THROWS_AS((void)positioning_errors(fixes, truth), LengthMismatch);
}

TEST_CASE("summary statistics obey the power-mean ordering") {
    std::mt19937_64 rng = substream(19, "metrics-prop");
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> errors;
        const int n = 1 + trial % 20;
        for (int i = 0; i < n; ++i) errors.push_back(u(rng));
        const ErrorStats s = summarize_errors(errors);
        CHECK(s.rmse >= s.mae - 1e-12);
        CHECK(s.max >= s.rmse - 1e-12);

        const CdfSeries cdf = empirical_cdf(errors);
        REQUIRE(cdf.size() == errors.size());
        CHECK(cdf.back().second == 1.0);
        for (std::size_t i = 1; i < cdf.size(); ++i) {
            CHECK(cdf[i].first >= cdf[i - 1].first);
            CHECK(cdf[i].second >= cdf[i - 1].second);
        }
    }
}
