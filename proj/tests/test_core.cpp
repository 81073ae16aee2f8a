#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ftmloc/calibration.hpp"
#include "ftmloc/dual.hpp"
#include "ftmloc/rng.hpp"
#include "ftmloc/types.hpp"

using namespace ftmloc;

TEST_CASE("distance basics") {
    CHECK(distance<double>({0, 0}, {0, 0}) == 0.0);
    CHECK(distance<double>({0, 0}, {3, 4}) == doctest::Approx(5.0));
    // sqrt(9 + 16) = 5
    CHECK(distance<double>({1, 2}, {4, 6}) == doctest::Approx(5.0));
}

TEST_CASE("distance properties on random points") {
    std::mt19937_64 rng = substream(42, "distance-prop");
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 500; ++i) {
        const Vec2 a(u(rng), u(rng));
        const Vec2 b(u(rng), u(rng));
        const Vec2 c(u(rng), u(rng));
        CHECK(distance<double>(a, b) == distance<double>(b, a));
        CHECK(distance<double>(a, a) == 0.0);
        if (a != b) CHECK(distance<double>(a, b) > 0.0);
        CHECK(distance<double>(a, c) <= distance<double>(a, b) + distance<double>(b, c) + 1e-12);
    }
}

TEST_CASE("calibrate identity and clamp") {
    const CalibrationPoly identity = make_poly({0.0, 1.0, 0.0});
    CHECK(calibrate(identity, 12.3) == doctest::Approx(12.3));
    CHECK(calibrate(identity, -0.35) == 0.0);

    const CalibrationPoly shifted = make_poly({-2.0, 1.0, 0.0});
    CHECK(calibrate(shifted, 1.0) == 0.0);
}

TEST_CASE("calibrate quadratic benchmark coefficients") {
    // Independent oracle: naive term-by-term evaluation.
    const double c0 = -3.8592, c1 = 0.9252, c2 = -0.0031;
    const double x = 50.0;
    const double expected = c0 + c1 * x + c2 * x * x;
    CHECK(expected == doctest::Approx(34.6508).epsilon(1e-9));

    const CalibrationPoly poly = make_poly({c0, c1, c2});
    CHECK(calibrate(poly, x) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("horner matches naive evaluation on random polynomials") {
    std::mt19937_64 rng = substream(42, "horner-prop");
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> arg(-10.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd cs(4);
        for (int i = 0; i < 4; ++i) cs[i] = coef(rng);
        const CalibrationPolyT<double> poly{cs};
        const double x = arg(rng);
        double naive = 0.0;
        double power = 1.0;
        for (int l = 0; l < 4; ++l) {
            naive += cs[l] * power;
            power *= x;
        }
        CHECK(eval_poly(poly, x) == doctest::Approx(naive).epsilon(1e-10));
    }
}

TEST_CASE("offset calibration is the degenerate quadratic") {
    const CalibrationPoly zero = offset_calibration(0.0);
    REQUIRE(zero.coeffs.size() == 3);
    CHECK(zero.coeffs[0] == 0.0);
    CHECK(zero.coeffs[1] == 1.0);
    CHECK(zero.coeffs[2] == 0.0);

    CHECK(calibrate(offset_calibration(2.5), 10.0) == doctest::Approx(12.5));
    CHECK(calibrate(offset_calibration(-5.0), 3.0) == 0.0);

    std::mt19937_64 rng = substream(42, "offset-prop");
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int i = 0; i < 100; ++i) {
        const double b = u(rng);
        const double d = u(rng);
        CHECK(calibrate(offset_calibration(b), d) == std::max(d + b, 0.0));
    }
}

TEST_CASE("std estimate floors at the configured minimum") {
    CHECK(estimate_std({"ap", 0.0, 1.2}, 0.1) == 1.2);
    CHECK(estimate_std({"ap", 0.0, 0.0}, 0.1) == 0.1);
    CHECK(estimate_std({"ap", 0.0, 0.05}, 0.1) == 0.1);
}

TEST_CASE("calibrate output is non-negative and finite on random input") {
    std::mt19937_64 rng = substream(42, "cal-prop");
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> arg(-50.0, 50.0);
    for (int i = 0; i < 300; ++i) {
        const CalibrationPoly poly = make_poly({coef(rng), coef(rng), coef(rng)});
        const double out = calibrate(poly, arg(rng));
        CHECK(out >= 0.0);
        CHECK(std::isfinite(out));
    }
}

TEST_CASE("dual arithmetic differentiates scalar expressions") {
    // d/dx (x^2 + 3x + 1/x) at x = 2 is 2*2 + 3 - 1/4 = 6.75.
    const Dual x(2.0, 1.0);
    const Dual y = x * x + 3.0 * x + 1.0 / x;
    CHECK(y.v == doctest::Approx(4.0 + 6.0 + 0.5));
    CHECK(y.d == doctest::Approx(6.75));

    // sqrt via Eigen norm: d/dx ||(x, 3)|| at x = 4 is 4/5.
    Vec2T<Dual> v(Dual(4.0, 1.0), Dual(3.0));
    const Dual n = v.norm();
    CHECK(n.v == doctest::Approx(5.0));
    CHECK(n.d == doctest::Approx(0.8));
}

TEST_CASE("dual calibration clamps with zero derivative") {
    Eigen::Matrix<Dual, Eigen::Dynamic, 1> cs(3);
    cs << Dual(-2.0, 1.0), Dual(1.0), Dual(0.0);  // derivative seed on c0
    const CalibrationPolyT<Dual> poly{cs};

    const Dual active = calibrate(poly, 10.0);  // 8 > 0: d(out)/d(c0) = 1
    CHECK(active.v == doctest::Approx(8.0));
    CHECK(active.d == doctest::Approx(1.0));

    const Dual clamped = calibrate(poly, 1.0);  // -1 -> clamp
    CHECK(clamped.v == 0.0);
    CHECK(clamped.d == 0.0);
}
