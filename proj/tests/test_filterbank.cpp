#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "epishear/filterbank.hpp"

using namespace epishear;
constexpr double kPi = std::numbers::pi;

namespace {
// plain DTFT of a tap vector centered on its middle element
double dtft(const std::vector<double>& f, double w) {
    std::complex<double> acc = 0;
    const int c = int(f.size()) / 2;
    for (int n = 0; n < int(f.size()); ++n) acc += f[n] * std::polar(1.0, -w * (n - c));
    return acc.real();
}
}  // namespace

TEST_CASE("cdf 9/7 pair: DC and Nyquist gains") {
    const auto p = FilterPair1D::cdf97();
    CHECK(p.h.size() == 9);
    CHECK(p.g.size() == 7);
    CHECK(dtft(p.h, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(dtft(p.h, kPi)) < 1e-9);
    CHECK(std::abs(dtft(p.g, 0)) < 1e-12);
    // 9/7 analysis low-pass center tap with unit DC gain
    CHECK(p.h[4] == doctest::Approx(0.602949018236358).epsilon(1e-12));
}

TEST_CASE("floored low-pass keeps a gain of c at pi") {
    for (double c : {0.0, 0.1, 0.2, 0.5}) {
        const auto p = FilterPair1D::cdf97_floored(c);
        CHECK(dtft(p.h, 0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dtft(p.h, kPi) == doctest::Approx(c).epsilon(1e-9));
    }
    CHECK_THROWS_AS(FilterPair1D::cdf97_floored(1.0), std::invalid_argument);
    CHECK_THROWS_AS(FilterPair1D::cdf97_floored(-0.1), std::invalid_argument);
}

TEST_CASE("validate rejects malformed pairs") {
    FilterPair1D p = FilterPair1D::legall53();
    CHECK_NOTHROW(p.validate());
    FilterPair1D even{{0.5, 0.5}, {1, -2, 1}};
    CHECK_THROWS_AS(even.validate(), std::invalid_argument);
    FilterPair1D skew{{0.2, 0.5, 0.3}, {-0.25, 0.5, -0.25}};
    CHECK_THROWS_AS(skew.validate(), std::invalid_argument);
    FilterPair1D dc{{0.25, 0.5, 0.25}, {0.25, 0.5, 0.25}};
    CHECK_THROWS_AS(dc.validate(), std::invalid_argument);
    FilterPair1D empty{{}, {1}};
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("filter_response matches a direct DTFT") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> W(-kPi, kPi);
    for (const auto& p : {FilterPair1D::cdf97(), FilterPair1D::legall53(), default_filter_pair()})
        for (int i = 0; i < 50; ++i) {
            const double w = W(rng);
            CHECK(filter_response(p.h, w) == doctest::Approx(dtft(p.h, w)).epsilon(1e-12));
            CHECK(filter_response(p.g, w) == doctest::Approx(dtft(p.g, w)).epsilon(1e-12));
        }
}

TEST_CASE("cascade taps agree with the product-form responses") {
    const auto base = default_filter_pair();
    const auto sets = cascade_filters(base, 4);
    REQUIRE(sets.size() == 5);
    CHECK(sets[0].h == std::vector<double>{1.0});
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> W(-kPi, kPi);
    for (int j = 1; j <= 4; ++j) {
        CHECK(sets[j].h.size() % 2 == 1);
        for (int i = 0; i < 25; ++i) {
            const double w = W(rng);
            CHECK(dtft(sets[j].h, w) == doctest::Approx(cascade_h_response(base, j, w)).epsilon(1e-10));
            CHECK(dtft(sets[j].g, w) == doctest::Approx(cascade_g_response(base, j, w)).epsilon(1e-10));
        }
    }
    // h_1 is the base filter itself
    CHECK(sets[1].h.size() == base.h.size());
    CHECK_THROWS_AS(cascade_filters(base, -1), std::invalid_argument);
    CHECK_THROWS_AS(cascade_g_response(base, 0, 0.1), std::invalid_argument);
}

TEST_CASE("cascade low-pass has unit DC gain and the high-pass none") {
    const auto base = default_filter_pair();
    for (int j = 0; j <= 5; ++j) CHECK(cascade_h_response(base, j, 0.0) == doctest::Approx(1.0));
    for (int j = 1; j <= 5; ++j) CHECK(std::abs(cascade_g_response(base, j, 0.0)) < 1e-12);
}

TEST_CASE("fan filter closed forms") {
    // order 1: P = 1 - x = (1 + t) / 2 with t = (cos b - cos a) / 2
    FanFilter f1(1);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> W(-kPi, kPi);
    for (int i = 0; i < 20; ++i) {
        const double a = W(rng), b = W(rng);
        const double t = (std::cos(b) - std::cos(a)) / 2;
        CHECK(f1.response(a, b) == doctest::Approx((1 + t) / 2).epsilon(1e-12));
    }
    // order 2: (1-x)^2 (1 + 2x)
    FanFilter f2(2);
    for (int i = 0; i < 20; ++i) {
        const double a = W(rng), b = W(rng);
        const double x = (1 - (std::cos(b) - std::cos(a)) / 2) / 2;
        CHECK(f2.response(a, b) == doctest::Approx((1 - x) * (1 - x) * (1 + 2 * x)).epsilon(1e-12));
    }
}

TEST_CASE("fan filter: passband, stopband and diagonal") {
    for (int order : {1, 2, 3, 4}) {
        FanFilter f(order);
        CHECK(f.response(kPi, 0) == doctest::Approx(1.0));
        CHECK(std::abs(f.response(0, kPi)) < 1e-12);
        CHECK(f.response(0.7, 0.7) == doctest::Approx(0.5));
        CHECK(f.response(-1.3, 1.3) == doctest::Approx(0.5));
    }
}

TEST_CASE("fan filter property: P(a,b) + P(b,a) = 1 and evenness") {
    FanFilter f(3);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> W(-kPi, kPi);
    for (int i = 0; i < 200; ++i) {
        const double a = W(rng), b = W(rng);
        CHECK(f.response(a, b) + f.response(b, a) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(f.response(-a, b) == doctest::Approx(f.response(a, b)).epsilon(1e-12));
        CHECK(f.response(a, -b) == doctest::Approx(f.response(a, b)).epsilon(1e-12));
        const double r = f.response(a, b);
        CHECK(r >= -1e-12);
        CHECK(r <= 1 + 1e-12);
    }
}

TEST_CASE("fan taps reproduce the response") {
    for (int order : {1, 2, 3}) {
        FanFilter f(order);
        CHECK(f.taps().rows == 4 * order - 1);
        CHECK(f.taps().cols == 4 * order - 1);
        std::mt19937 rng(order);
        std::uniform_real_distribution<double> W(-kPi, kPi);
        for (int i = 0; i < 50; ++i) {
            const double a = W(rng), b = W(rng);
            CHECK(f.taps_response(a, b) == doctest::Approx(f.response(a, b)).epsilon(1e-11));
        }
        // point symmetric about the center
        const Grid& t = f.taps();
        for (int r = 0; r < t.rows; ++r)
            for (int c = 0; c < t.cols; ++c)
                CHECK(t(r, c) == doctest::Approx(t(t.rows - 1 - r, t.cols - 1 - c)).epsilon(1e-12));
    }
    CHECK_THROWS(FanFilter(0));
}

TEST_CASE("fan response grid samples the scaled response with wrap-around") {
    FanFilter f(3);
    const int n1 = 16, n2 = 12;
    const Grid g = fan_response_grid(f, n1, n2, 2.0, 4.0);
    REQUIRE(g.rows == n1);
    REQUIRE(g.cols == n2);
    for (int r = 0; r < n1; ++r)
        for (int c = 0; c < n2; ++c) {
            const double x1 = 2 * kPi * (r < n1 / 2 ? r : r - n1) / n1;
            const double x2 = 2 * kPi * (c < n2 / 2 ? c : c - n2) / n2;
            CHECK(g(r, c) == doctest::Approx(f.response(2 * x1, 4 * x2)).epsilon(1e-12));
        }
}
