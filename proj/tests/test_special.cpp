#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "maxcorr/errors.hpp"
#include "maxcorr/special.hpp"

using namespace maxcorr;

namespace {

// Gauss-Kronrod quadrature after substituting u = 1 - w^2, which turns the
// integrand into the smooth 2 w^{n-3} (2 - w^2)^{(n-4)/2} on [0, sqrt(1 - v)].
double quadrature_T(double v, int n) {
    const double k = 0.5 * (n - 4);
    auto f = [k, n](double w) { return 2.0 * std::pow(w, n - 3) * std::pow(2.0 - w * w, k); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::sqrt(1.0 - v), 10, 1e-15);
}

// \int_v^1 (1-u^2)^3 du, expanded by hand.
double degree7_T(double v) {
    return 16.0 / 35.0 - (v - std::pow(v, 3) + 0.6 * std::pow(v, 5) - std::pow(v, 7) / 7.0);
}

}  // namespace

TEST_CASE("beta_const exact values") {
    CHECK(std::abs(beta_const(10) - 32.0 / 35.0) <= 1e-12);
    CHECK(std::abs(beta_const(6) - 4.0 / 3.0) <= 1e-12);
    CHECK(std::abs(beta_const(5) - std::numbers::pi / 2.0) <= 1e-12);
    CHECK_THROWS_AS(beta_const(4), InvalidArgument);
}

TEST_CASE("T endpoints") {
    for (int n : {5, 6, 7, 10, 11, 20, 25, 40, 41, 60}) {
        CAPTURE(n);
        const TailIntegral T(n);
        CHECK(T(1.0) == 0.0);
        CHECK(std::abs(T(0.0) - beta_const(n) / 2.0) <= 1e-12);
    }
    CHECK(std::abs(incomplete_T(0.0, 10) - 16.0 / 35.0) <= 1e-12);
}

TEST_CASE("T at n = 10 against the degree-7 polynomial") {
    CHECK(std::abs(incomplete_T(0.5, 10) - degree7_T(0.5)) <= 1e-14);
    CHECK(incomplete_T(0.5, 10) == doctest::Approx(0.0636).epsilon(1e-3));
    const TailIntegral T(10);
    for (int i = 0; i <= 1000; ++i) {
        const double v = i / 1000.0;
        CHECK(std::abs(T(v) - degree7_T(v)) <= 1e-10);
    }
}

TEST_CASE("T matches quadrature for even and odd n") {
    for (int n : {5, 6, 7, 9, 10, 13, 20, 31, 40, 44, 101}) {
        const TailIntegral T(n);
        CAPTURE(n);
        for (double v : {0.0, 0.05, 0.3, 0.49, 0.5, 0.51, 0.8, 0.92, 0.99, 0.999}) {
            CAPTURE(v);
            const double expected = quadrature_T(v, n);
            CHECK(std::abs(T(v) - expected) <= 1e-10 * std::max(expected, 1e-300) + 1e-300);
        }
    }
}

TEST_CASE("closed form agrees with the incomplete beta identity") {
    for (int n : {6, 10, 20, 24}) {
        const TailIntegral T(n);
        REQUIRE(T.closed_form());
        for (int i = 0; i <= 100; ++i) {
            const double v = i / 100.0;
            const double w = (1.0 - v) * (1.0 + v);
            const double via_beta = 0.5 * beta_const(n) * regularized_incomplete_beta(0.5 * (n - 2), 0.5, w);
            CHECK(std::abs(T(v) - via_beta) <= 1e-12 * std::max(via_beta, 1e-3));
        }
    }
    CHECK_FALSE(TailIntegral(26).closed_form());
    CHECK_FALSE(TailIntegral(11).closed_form());
}

TEST_CASE("T is strictly decreasing") {
    for (int n : {5, 10, 15}) {
        const TailIntegral T(n);
        double prev = T(0.0);
        for (int i = 1; i <= 2000; ++i) {
            const double cur = T(i / 2000.0);
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("T rejects v outside [0, 1]") {
    CHECK_THROWS_AS(incomplete_T(-0.1, 10), InvalidArgument);
    CHECK_THROWS_AS(incomplete_T(1.5, 10), InvalidArgument);
    CHECK_THROWS_AS(incomplete_T(std::nan(""), 10), InvalidArgument);
}

TEST_CASE("regularized incomplete beta matches Boost") {
    for (double a : {0.5, 1.5, 4.0, 9.5, 30.0})
        for (double b : {0.5, 2.0, 7.0})
            for (double x : {0.0, 1e-6, 0.1, 0.5, 0.77, 0.99, 1.0}) {
                CAPTURE(a);
                CAPTURE(b);
                CAPTURE(x);
                const double expected = boost::math::ibeta(a, b, x);
                CHECK(std::abs(regularized_incomplete_beta(a, b, x) - expected) <= 1e-13 * std::max(1.0, expected));
            }
    CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), InvalidArgument);
    CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, 1.5), InvalidArgument);
}

TEST_CASE("inverse round trip") {
    for (int n : {5, 10, 11, 50}) {
        const TailIntegral T(n);
        for (double v : {0.01, 0.2, 0.6, 0.9, 0.95, 0.99, 0.9999}) {
            const double t = T(v);
            const double back = T.inverse(t);
            CHECK(std::abs(T(back) - t) <= 1e-13);
            CHECK(back == doctest::Approx(v).epsilon(1e-9));
        }
        CHECK(T.inverse(0.0) == 1.0);
        CHECK(T.inverse(T.at_zero()) == 0.0);
        CHECK(T(T.inverse(1e-30)) == doctest::Approx(1e-30).epsilon(1e-6));
    }
}
