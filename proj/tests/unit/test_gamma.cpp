#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "duplex/error.hpp"
#include "duplex/special/gamma.hpp"

using namespace duplex;
using namespace duplex::special;

TEST_CASE("log_gamma reference values") {
    CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(log_gamma(0.5) == doctest::Approx(0.5723649429247001).epsilon(1e-14));
    CHECK(log_gamma(10.0) == doctest::Approx(12.801827480081469).epsilon(1e-14));
}

TEST_CASE("log_gamma recurrence and reflection on the real line") {
    for (double x = 0.5; x <= 50.0; x += 0.37) {
        const double lhs = std::exp(log_gamma(x + 1.0) - log_gamma(x));
        CHECK(std::abs(lhs / x - 1.0) < 1e-12);
    }
    // Γ(x)Γ(1-x) = π / sin(πx)
    for (double x = 0.05; x < 1.0; x += 0.1) {
        const double prod = std::exp(log_gamma(x) + log_gamma(1.0 - x));
        CHECK(std::abs(prod * std::sin(std::numbers::pi * x) / std::numbers::pi - 1.0) < 1e-12);
    }
}

TEST_CASE("log_gamma rejects poles") {
    CHECK_THROWS_AS(log_gamma(0.0), DomainError);
    CHECK_THROWS_AS(log_gamma(-3.0), DomainError);
    CHECK_THROWS_AS(log_gamma(std::complex<double>(-2.0, 0.0)), DomainError);
}

TEST_CASE("log_gamma on negative reals carries the sign of Γ") {
    const auto v = log_gamma(std::complex<double>(-2.5, 0.0));
    // Γ(-2.5) = -0.9453087205
    CHECK(std::exp(v).real() == doctest::Approx(-0.94530872048294188).epsilon(1e-13));
}

TEST_CASE("complex log_gamma matches the principal branch") {
    // Reference values from an arbitrary-precision evaluation.
    struct Case {
        double x, y, re, im;
    };
    const Case cases[] = {
        {0.5, 1, -0.65279064420437292, -0.95500772434256911},
        {0.3, 2.5, -3.1901582064283988, -0.51470529587404174},
        {-2.7, 0.4, -0.84963045007744144, -9.5102062715457043},
        {-0.5, -3, -4.9057622261983901, 1.4261257331230843},
        {1.2, -40, -59.330681420405039, -108.64965229157489},
        {-7.3, 15, -44.090843883445546, 11.425466380148626},
        {3, 200, -299.99447091206064, 863.57504783456006},
        {0.25, 0.0001, 1.2880224387114381, -0.00042274533178300529},
        {-10.5, 0.001, -15.147275480088594, -34.555120950356815},
        {2.0, 0.5, -0.079373723529674486, 0.21958931009537835},
    };
    for (const auto& c : cases) {
        const auto v = log_gamma(std::complex<double>(c.x, c.y));
        CAPTURE(c.x);
        CAPTURE(c.y);
        CHECK(v.real() == doctest::Approx(c.re).epsilon(1e-12).scale(1.0));
        CHECK(v.imag() == doctest::Approx(c.im).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("complex log_gamma recurrence off the real axis") {
    for (double y : {-30.0, -2.0, 0.7, 5.0}) {
        for (double x = -6.3; x < 20.0; x += 1.1) {
            const std::complex<double> z(x, y);
            const auto ratio = std::exp(log_gamma(z + 1.0) - log_gamma(z)) / z;
            CHECK(std::abs(ratio - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("incomplete gamma") {
    for (double x : {0.0, 0.1, 1.0, 7.5}) {
        CHECK(incomplete_gamma(1.0, x, IncompleteKind::lower) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-14));
    }
    CHECK(incomplete_gamma(3.2, 0.0, IncompleteKind::lower) == 0.0);
    CHECK(incomplete_gamma(2.0, 1.0, IncompleteKind::lower) == doctest::Approx(0.26424111765711533).epsilon(1e-14));
    for (double a : {0.3, 1.0, 2.5, 11.0}) {
        for (double x : {0.01, 0.9, 4.0, 30.0}) {
            const double sum = incomplete_gamma(a, x, IncompleteKind::lower) + incomplete_gamma(a, x, IncompleteKind::upper);
            CHECK(std::abs(sum / std::exp(log_gamma(a)) - 1.0) < 1e-12);
        }
    }
    CHECK_THROWS_AS(incomplete_gamma(0.0, 1.0, IncompleteKind::lower), DomainError);
    CHECK_THROWS_AS(incomplete_gamma(-1.0, 1.0, IncompleteKind::upper), DomainError);
}
