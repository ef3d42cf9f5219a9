#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "duplex/channel/model.hpp"
#include "duplex/channel/sampling.hpp"
#include "duplex/error.hpp"
#include "duplex/special/gamma.hpp"

using namespace duplex;
using namespace duplex::channel;

namespace {

template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf&& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

std::vector<double> draw_fading(const FadingParams& p, std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<double> out(n);
    for (auto& y : out) y = sample_fading_power(p, rng);
    return out;
}

Environment fig6_env() {
    Environment e;
    e.fading = FadingParams(2.0, 2.0, 8.0);
    e.path_loss_exponent = 2.0;
    e.distance_m = 5.0;
    e.noise_variance = 0.1;
    e.si_variance = 0.1;
    e.si_cancellation = 0.2;
    e.interferer_power = dbw_to_watts(1.0);
    e.interference_scale = 0.2;
    e.interferer_count = 2;
    e.peer_power = dbw_to_watts(10.0);
    return e;
}

}  // namespace

TEST_CASE("unit conversion") {
    CHECK(dbw_to_watts(0.0).value == doctest::Approx(1.0));
    CHECK(dbw_to_watts(30.0).value == doctest::Approx(1000.0));
    CHECK(watts_to_dbw(Watts{0.5}) == doctest::Approx(-3.0103).epsilon(1e-4));
}

TEST_CASE("fading scale reproduces the mean power") {
    const FadingParams p(3.0, 1.7, 8.0);
    const double expected = 8.0 * std::exp(special::log_gamma(1.7) - special::log_gamma(1.7 + 2.0 / 3.0));
    CHECK(p.scale() == doctest::Approx(expected).epsilon(1e-14));
    CHECK_THROWS_AS(FadingParams(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(FadingParams(2.0, -1.0), ConfigError);
    CHECK_THROWS_AS(FadingParams(2.0, 1.0, 0.0), ConfigError);
}

TEST_CASE("Rayleigh power samples are exponential") {
    const auto ys = draw_fading(FadingParams(2.0, 1.0, 1.0), 1000000, 11);
    CHECK(ks_statistic(ys, [](double y) { return 1.0 - std::exp(-y); }) < 0.002);
}

TEST_CASE("fading sample mean matches the mean power") {
    for (auto [a, m, w] : {std::tuple{1.0, 0.5, 2.0}, std::tuple{4.0, 5.0, 8.0}, std::tuple{2.5, 3.0, 0.3}}) {
        const auto ys = draw_fading(FadingParams(a, m, w), 200000, 5);
        double s = 0.0, s2 = 0.0;
        for (double y : ys) {
            s += y;
            s2 += y * y;
        }
        const double n = static_cast<double>(ys.size());
        const double mean = s / n;
        const double stderr_ = std::sqrt((s2 / n - mean * mean) / n);
        CHECK(std::abs(mean - w) < 3.0 * stderr_);
    }
}

TEST_CASE("Weibull special case and the transformed gamma variable") {
    const FadingParams p(3.3, 1.0, 2.0);
    const auto ys = draw_fading(p, 1000000, 3);
    // μ = 1: F(y) = 1 - exp(-(y/β)^{α/2})
    CHECK(ks_statistic(ys, [&](double y) { return 1.0 - std::exp(-std::pow(y / p.scale(), 1.65)); }) < 0.002);
    std::vector<double> zs;
    for (double y : ys) zs.push_back(std::pow(y / p.scale(), 0.5 * p.alpha()));
    CHECK(ks_statistic(zs, [](double z) { return 1.0 - std::exp(-z); }) < 0.002);
}

TEST_CASE("fading samples follow the analytic CDF for random shapes") {
    RandomStream pick(2024);
    for (int i = 0; i < 5; ++i) {
        const double alpha = 1.0 + 4.0 * pick.uniform();
        const double mu = 0.5 + 5.5 * pick.uniform();
        const FadingParams p(alpha, mu, 1.0);
        CAPTURE(alpha);
        CAPTURE(mu);
        CHECK(ks_statistic(draw_fading(p, 1000000, 100 + i), [&](double y) { return p.cdf(y); }) < 0.002);
    }
}

TEST_CASE("aggregate interference moments") {
    RandomStream rng(9);
    const std::size_t n = 400000;
    for (auto [count, eta] : {std::pair{1, 0.3}, std::pair{3, 0.2}}) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = sample_interference_aggregate(count, eta, rng);
            s += u;
            s2 += u * u;
        }
        const double mean = s / n;
        const double var = s2 / n - mean * mean;
        const double true_var = count * eta * eta;
        CHECK(std::abs(mean - count * eta) < 3.0 * std::sqrt(true_var / n));
        // variance of the sample variance for a gamma law: (μ4 - σ^4)/n, μ4 = 3k(k+2)η^4
        const double mu4 = 3.0 * count * (count + 2.0) * std::pow(eta, 4);
        CHECK(std::abs(var - true_var) < 4.0 * std::sqrt((mu4 - true_var * true_var) / n));
    }
    CHECK_THROWS_AS(sample_interference_aggregate(0, 1.0, rng), DomainError);
}

TEST_CASE("sinr substitution and limits") {
    Environment e;
    e.peer_power = Watts{1.0};
    e.distance_m = 1.0;
    e.interferer_power = Watts{1.0};
    e.noise_variance = 1.0;
    e.si_cancellation = 0.0;
    CHECK(sinr(e, Watts{0.0}, {1.0, 1.0, 1.0}) == doctest::Approx(0.5));
    CHECK(sinr(e, Watts{0.0}, {1.0, 1.0, 1.0}, true) == doctest::Approx(1.0));
    e.noise_variance = 1e12;
    CHECK(sinr(e, Watts{0.0}, {1.0, 1.0, 1e12}) < 1e-11);
    CHECK_THROWS_AS(sinr(e, Watts{0.0}, {1.0, 0.0, 1e12}, true), DomainError);
    CHECK_THROWS_AS(sinr(e, Watts{0.0}, {1.0, 1.0, 3.0}), ConfigError);
}

TEST_CASE("sinr monotonicity") {
    const Environment e = fig6_env();
    const Watts own{1.0};
    const double phi = noise_floor(e, own);
    double prev = 0.0;
    for (double h2 = 0.1; h2 < 5.0; h2 += 0.3) {
        const double g = sinr(e, own, {h2, 1.0, phi});
        CHECK(g > prev);
        prev = g;
    }
    prev = INFINITY;
    for (double u = 0.1; u < 5.0; u += 0.3) {
        const double g = sinr(e, own, {1.0, u, phi});
        CHECK(g < prev);
        prev = g;
    }
    prev = INFINITY;
    for (double p = 0.0; p < 100.0; p += 7.0) {
        const double g = sinr(e, Watts{p}, {1.0, 1.0, noise_floor(e, Watts{p})});
        CHECK(g < prev);
        prev = g;
    }
}

TEST_CASE("empirical CDF edges and determinism") {
    const Environment e = fig6_env();
    MonteCarloSpec spec;
    spec.samples = 20000;
    spec.seed = 4;
    const auto cdf = sinr_empirical_cdf(e, Watts{1.0}, spec, {1e-12, 1.0, 1e12});
    CHECK(cdf[0] == 0.0);
    CHECK(cdf[2] == 1.0);
    CHECK(cdf == sinr_empirical_cdf(e, Watts{1.0}, spec, {1e-12, 1.0, 1e12}));
    spec.samples = 100;
    CHECK_THROWS_AS(sinr_empirical_cdf(e, Watts{1.0}, spec, {1.0}), ConfigError);
}

TEST_CASE("Monte Carlo draws do not depend on the worker count") {
    const Environment e = fig6_env();
    MonteCarloSpec spec;
    spec.samples = 50001;
    spec.seed = 17;
    ::setenv("DUPLEX_THREADS", "1", 1);
    const auto one = sample_sinr(e, Watts{1.0}, spec);
    ::setenv("DUPLEX_THREADS", "4", 1);
    const auto four = sample_sinr(e, Watts{1.0}, spec);
    ::unsetenv("DUPLEX_THREADS");
    CHECK(one == four);
    spec.seed = 18;
    CHECK(one != sample_sinr(e, Watts{1.0}, spec));
}

TEST_CASE("modulation table") {
    const auto& t = modulation_table();
    REQUIRE(t.size() == 4);
    CHECK(modulation("bpsk").tau1 == 1.0);
    CHECK(modulation("BPSK").tau2 == 0.5);
    CHECK(modulation("coherent-BFSK").tau1 == 0.5);
    CHECK(modulation("coherent-BFSK").tau2 == 0.5);
    CHECK(modulation("noncoherent-BFSK").tau1 == 0.5);
    CHECK(modulation("noncoherent-BFSK").tau2 == 1.0);
    CHECK(modulation("DPSK").tau1 == 1.0);
    CHECK(modulation("DPSK").tau2 == 1.0);
    CHECK_THROWS_AS(modulation("QAM16"), ConfigError);
}

TEST_CASE("environment validation") {
    Environment e = fig6_env();
    CHECK_NOTHROW(e.validate());
    e.si_cancellation = 1.5;
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = fig6_env();
    e.interferer_count = 0;
    CHECK_THROWS_AS(e.validate(), ConfigError);
    e = fig6_env();
    e.distance_m = -1.0;
    CHECK_THROWS_AS(e.validate(), ConfigError);
}
