#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "duplex/channel/sampling.hpp"
#include "duplex/error.hpp"
#include "duplex/perf/kernels.hpp"
#include "duplex/perf/metrics.hpp"
#include "fixtures.hpp"

using namespace duplex;
using namespace duplex::perf;

namespace {

double rel(double x, double ref) { return std::abs(x / ref - 1.0); }

struct Moments {
    double mean;
    double stderr_;
};

template <class F>
Moments mc_moments(const Environment& e, Watts own, std::size_t n, std::uint64_t seed, F&& f) {
    channel::MonteCarloSpec spec;
    spec.samples = n;
    spec.seed = seed;
    const auto g = channel::sample_sinr(e, own, spec);
    double s = 0.0, s2 = 0.0;
    for (double x : g) {
        const double v = f(x);
        s += v;
        s2 += v * v;
    }
    const double mean = s / n;
    return {mean, std::sqrt(std::max(0.0, s2 / n - mean * mean) / n)};
}

const Watts kOwnOutage = dbw_to_watts(0.0);

}  // namespace

// Integrates a density in log x; callers bound the mass outside [lo, hi].
template <class F>
double log_integral(F&& pdf, double lo, double hi) {
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate([&](double u) { return pdf(std::exp(u)) * std::exp(u); }, std::log(lo), std::log(hi), 1e-7);
}

TEST_CASE("density integrates to one") {
    const auto m = make_model(fixtures::outage_env(5.0, 10.0), kOwnOutage);
    CHECK(closed::cdf(m, 1e-4) < 1e-8);
    CHECK(closed::ccdf(m, 1e3) < 1e-8);
    CHECK(std::abs(log_integral([&](double x) { return closed::pdf(m, x); }, 1e-4, 1e3) - 1.0) < 1e-3);
    CHECK(std::abs(log_integral([&](double x) { return limited::pdf(m, x); }, 1e-4, 1e3) - 1.0) < 1e-3);
}

TEST_CASE("closed-form density matches the pre-transform integral") {
    for (double d : {2.0, 5.0, 10.0}) {
        const auto m = make_model(fixtures::outage_env(d, 10.0), kOwnOutage);
        for (int i = 0; i < 30; ++i) {
            const double x = std::pow(10.0, -3.0 + 5.0 * i / 29.0);
            const double ref = reference::pdf(m, x);
            if (ref <= 1e-8) continue;
            CAPTURE(x);
            CHECK(rel(closed::pdf(m, x), ref) < 1e-4);
        }
    }
}

TEST_CASE("interference-limited forms agree with the full model in their regime") {
    const auto m = make_model(fixtures::interference_limited(fixtures::outage_env(5.0, 10.0)), kOwnOutage);
    double worst = 0.0;
    for (int i = 0; i < 30; ++i) {
        const double x = std::pow(10.0, -2.0 + 4.0 * i / 29.0);
        worst = std::max(worst, rel(limited::pdf(m, x), closed::pdf(m, x)));
    }
    CHECK(worst < 1e-2);
}

TEST_CASE("CDF limits, monotonicity and consistency with the density") {
    const auto m = make_model(fixtures::outage_env(5.0, 10.0), kOwnOutage);
    CHECK(closed::cdf(m, 1e-8) < 1e-6);
    CHECK(closed::cdf(m, 1e6) > 1.0 - 1e-6);
    double prev = 0.0;
    for (double x = 0.01; x < 100.0; x *= 1.5) {
        const double f = closed::cdf(m, x);
        CHECK(f >= prev);
        CHECK(f <= 1.0);
        prev = f;
    }
    double lo = 1e-4;
    double integral = closed::cdf(m, lo);
    for (double x : {0.2, 1.0, 4.0, 20.0}) {
        integral += log_integral([&](double t) { return closed::pdf(m, t); }, lo, x);
        CHECK(std::abs(integral - closed::cdf(m, x)) < 1e-4);
        lo = x;
    }
}

TEST_CASE("closed-form CDF matches Monte Carlo on the outage configuration") {
    const Environment e = fixtures::outage_env(5.0, 10.0);
    const auto m = make_model(e, kOwnOutage);
    std::vector<double> grid;
    for (int i = 0; i < 50; ++i) grid.push_back(std::pow(10.0, -2.0 + 4.0 * i / 49.0));
    channel::MonteCarloSpec spec;
    spec.samples = 1000000;
    spec.seed = 42;
    const auto emp = channel::sinr_empirical_cdf(e, kOwnOutage, spec, grid);
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) sup = std::max(sup, std::abs(closed::cdf(m, grid[i]) - emp[i]));
    CHECK(sup < 0.005);
}

TEST_CASE("degenerate channel: exponential over gamma") {
    // α = 2, μ = 1, no noise floor: F(x) = 1 - (1 + x b / a)^{-N}.
    SinrModel m;
    m.a = 3.0;
    m.b = 0.7;
    m.phi = 0.0;
    m.alpha = 2.0;
    m.mu = 1.0;
    m.n = 3.0;
    for (double x : {0.01, 0.5, 2.0, 40.0}) {
        const double elementary = 1.0 - std::pow(1.0 + x * m.b / m.a, -m.n);
        CHECK(rel(limited::cdf(m, x), elementary) < 1e-4);
        CHECK(rel(reference::cdf(m, x), elementary) < 1e-8);
    }
}

TEST_CASE("outage probability") {
    const Environment e = fixtures::interference_limited(fixtures::outage_env(5.0, 30.0));
    const double exact = outage_probability(e, kOwnOutage, 1.0, OutageMethod::interference_limited).value;
    const auto asym = outage_probability(e, kOwnOutage, 1.0, OutageMethod::asymptotic);
    CHECK(!asym.regime_warning);
    CHECK(rel(asym.value, exact) < 0.05);
    CHECK(rel(outage_probability(e, kOwnOutage, 1.0, OutageMethod::exact).value, exact) < 1e-2);

    const auto warned = outage_probability(fixtures::outage_env(5.0, 30.0), kOwnOutage, 1.0, OutageMethod::asymptotic);
    CHECK(warned.regime_warning);

    double prev = 1.0;
    for (double th : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const double v = outage_probability(fixtures::outage_env(5.0, 10.0), kOwnOutage, th, OutageMethod::exact).value;
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-8);
    CHECK(outage_probability(e, kOwnOutage, 1e-9, OutageMethod::interference_limited).value < 1e-20);

    prev = 1.0;
    for (double p = 0.0; p <= 30.0; p += 2.0) {
        const double v = outage_probability(fixtures::outage_env(5.0, p), kOwnOutage, 1.0, OutageMethod::exact).value;
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(outage_probability(e, kOwnOutage, 0.0, OutageMethod::exact), DomainError);
}

TEST_CASE("achievable rate") {
    const Watts own = dbw_to_watts(10.0);
    const Environment e = fixtures::rate_env(5.0, 10.0);
    const double closed_rate = achievable_rate(e, own, DuplexMode::full);
    const double mc = achievable_rate(e, own, DuplexMode::full, EvalMethod::monte_carlo(1000000, 3));
    CHECK(rel(closed_rate, mc) < 0.02);
    CHECK(rel(closed_rate, achievable_rate(e, own, DuplexMode::full, EvalMethod::quadrature())) < 1e-6);
    const double half = achievable_rate(e, own, DuplexMode::half);
    CHECK(rel(half, achievable_rate(e, own, DuplexMode::half, EvalMethod::monte_carlo(1000000, 3))) < 0.02);

    double prev = 0.0;
    for (double p = 0.0; p <= 25.0; p += 2.5) {
        const double r = achievable_rate(fixtures::rate_env(5.0, p), own, DuplexMode::full);
        CHECK(r > prev);
        prev = r;
    }
    const auto low = fixtures::rate_env(5.0, 0.0);
    const auto high = fixtures::rate_env(5.0, 25.0);
    CHECK(achievable_rate(low, own, DuplexMode::half) > achievable_rate(low, own, DuplexMode::full));
    CHECK(achievable_rate(high, own, DuplexMode::half) < achievable_rate(high, own, DuplexMode::full));
}

TEST_CASE("bit error probability") {
    const auto& bpsk = channel::modulation("BPSK");
    const Watts own = dbw_to_watts(20.0);

    Environment strong = fixtures::bep_env(60.0);
    strong.interferer_power = Watts{1e-6};
    CHECK(bep(strong, own, bpsk) < 1e-9);

    for (double p : {0.0, 10.0, 16.0}) {
        const Environment e = fixtures::bep_env(p);
        const double cf = bep(e, own, bpsk);
        const auto mc = mc_moments(e, own, 1000000, 8, [&](double g) { return conditional_bep(bpsk, g); });
        CAPTURE(p);
        CHECK(rel(cf, mc.mean) < 0.05);
        CHECK(std::abs(cf - mc.mean) < 5.0 * mc.stderr_);
    }

    for (double mu : {2.0, 3.0, 4.0}) {
        double prev = 0.0;
        for (double p = 5.0; p <= 30.0; p += 5.0) {
            const double v = bep(fixtures::own_power_env(mu), dbw_to_watts(p), bpsk);
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("modulation ordering of the conditional error") {
    const auto& bpsk = channel::modulation("BPSK");
    const auto& cbfsk = channel::modulation("coherent-BFSK");
    const auto& dpsk = channel::modulation("DPSK");
    const auto& nbfsk = channel::modulation("noncoherent-BFSK");
    channel::MonteCarloSpec spec;
    spec.samples = 20000;
    const auto g = channel::sample_sinr(fixtures::bep_env(10.0), dbw_to_watts(20.0), spec);
    for (double x : g) {
        CHECK(conditional_bep(dpsk, x) <= conditional_bep(nbfsk, x));
        CHECK(conditional_bep(bpsk, x) <= conditional_bep(cbfsk, x));
    }
}

TEST_CASE("triple agreement on random environments") {
    channel::RandomStream pick(77);
    const auto& bpsk = channel::modulation("BPSK");
    for (int i = 0; i < 10; ++i) {
        Environment e = fixtures::base(1.0 + 3.0 * pick.uniform(), 1.0 + 4.0 * pick.uniform());
        e.interferer_count = 1 + static_cast<int>(pick.below(3));
        e.distance_m = 2.0 + 8.0 * pick.uniform();
        e.noise_variance = 0.05 + pick.uniform();
        e.si_variance = 0.05 + pick.uniform();
        e.peer_power = dbw_to_watts(30.0 * pick.uniform());
        const Watts own = dbw_to_watts(20.0 * pick.uniform());
        CAPTURE(i);
        const double rate_cf = achievable_rate(e, own, DuplexMode::full);
        CHECK(rel(rate_cf, achievable_rate(e, own, DuplexMode::full, EvalMethod::quadrature())) < 1e-6);
        const auto rate_mc = mc_moments(e, own, 400000, i, [](double g) { return std::log2(1.0 + g); });
        CHECK(std::abs(rate_cf / e.bandwidth_hz - rate_mc.mean) < 5.0 * rate_mc.stderr_ + 1e-9);

        const double bep_cf = bep(e, own, bpsk);
        CHECK(rel(bep_cf, bep(e, own, bpsk, EvalMethod::quadrature())) < 1e-5);
        const auto bep_mc = mc_moments(e, own, 400000, 100 + i, [&](double g) { return conditional_bep(bpsk, g); });
        CHECK(std::abs(bep_cf - bep_mc.mean) < 5.0 * bep_mc.stderr_ + 1e-9);
    }
}

TEST_CASE("oracle equivalence of both density forms on random draws") {
    channel::RandomStream pick(5);
    for (int i = 0; i < 20; ++i) {
        SinrModel m;
        m.alpha = 1.0 + 4.0 * pick.uniform();
        m.mu = 0.5 + 4.5 * pick.uniform();
        m.n = 1.0 + static_cast<double>(pick.below(4));
        m.a = std::pow(10.0, -1.0 + 2.0 * pick.uniform());
        m.b = std::pow(10.0, -1.5 + 1.5 * pick.uniform());
        m.phi = std::pow(10.0, -1.5 + 1.5 * pick.uniform());
        SinrModel il = m;
        il.phi = 0.0;
        CAPTURE(i);
        for (double x : {0.05, 0.4, 1.5, 7.0}) {
            CAPTURE(x);
            const double ref = reference::pdf(m, x);
            if (ref > 1e-8) CHECK(rel(closed::pdf(m, x), ref) < 1e-4);
            const double ref_il = reference::pdf(il, x);
            if (ref_il > 1e-8) CHECK(rel(limited::pdf(m, x), ref_il) < 1e-4);
        }
    }
}

TEST_CASE("interference-limited rate and BEP match quadrature") {
    SinrModel m;
    m.alpha = 3.0;
    m.mu = 2.5;
    m.n = 2.0;
    m.a = 2.0;
    m.b = 0.4;
    m.phi = 0.0;
    CHECK(rel(limited::rate(m), reference::rate(m)) < 1e-6);
    CHECK(rel(limited::bep(m, 1.0, 0.5), reference::bep(m, 1.0, 0.5)) < 1e-6);
    CHECK(rel(limited::bep(m, 0.5, 1.0), reference::bep(m, 0.5, 1.0)) < 1e-6);
}

TEST_CASE("evaluation method validation") {
    const Environment e = fixtures::outage_env(5.0, 10.0);
    EvalMethod mc = EvalMethod::monte_carlo(100, 1);
    CHECK_THROWS_AS(sinr_cdf(e, kOwnOutage, 1.0, mc), ConfigError);
    CHECK_THROWS_AS(sinr_pdf(e, kOwnOutage, 1.0, EvalMethod::monte_carlo(20000, 1)), ConfigError);
    CHECK_THROWS_AS(sinr_pdf(e, kOwnOutage, -1.0), DomainError);
}
