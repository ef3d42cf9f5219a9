#include "duplex/perf/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "duplex/error.hpp"
#include "duplex/perf/kernels.hpp"
#include "duplex/special/gamma.hpp"

namespace duplex::perf {

namespace {

channel::MonteCarloSpec mc_spec(const EvalMethod& method, bool interference_limited) {
    channel::MonteCarloSpec s = method.mc;
    s.interference_limited = s.interference_limited || interference_limited;
    return s;
}

double mc_cdf(const Environment& env, Watts own_power, double x, const EvalMethod& method) {
    const std::vector<double> g = channel::sample_sinr(env, own_power, mc_spec(method, false));
    const auto below = std::count_if(g.begin(), g.end(), [x](double v) { return v <= x; });
    return static_cast<double>(below) / static_cast<double>(g.size());
}

}  // namespace

void EvalMethod::validate() const {
    if (kind == Method::monte_carlo && mc.samples < 10000)
        throw ConfigError("Monte Carlo evaluation needs at least 10^4 samples");
}

EvalMethod EvalMethod::monte_carlo(std::size_t samples, std::uint64_t seed) {
    EvalMethod m;
    m.kind = Method::monte_carlo;
    m.mc.samples = samples;
    m.mc.seed = seed;
    return m;
}

double sinr_pdf(const Environment& env, Watts own_power, double x, const EvalMethod& method) {
    method.validate();
    if (!(x > 0.0)) throw DomainError("sinr_pdf: x must be positive");
    SinrModel m = make_model(env, own_power);
    switch (method.kind) {
        case Method::closed_form:
            return closed::pdf(m, x, method.contour);
        case Method::interference_limited:
            return limited::pdf(m, x, method.contour);
        case Method::quadrature_reference:
            return reference::pdf(m, x);
        case Method::monte_carlo:
            break;
    }
    throw ConfigError("sinr_pdf: Monte Carlo densities are not provided; use sinr_cdf");
}

double sinr_cdf(const Environment& env, Watts own_power, double x, const EvalMethod& method) {
    method.validate();
    if (!(x > 0.0)) throw DomainError("sinr_cdf: x must be positive");
    SinrModel m = make_model(env, own_power);
    switch (method.kind) {
        case Method::closed_form:
            return closed::cdf(m, x, method.contour);
        case Method::interference_limited:
            return limited::cdf(m, x, method.contour);
        case Method::quadrature_reference:
            return std::clamp(reference::cdf(m, x), 0.0, 1.0);
        case Method::monte_carlo:
            return mc_cdf(env, own_power, x, method);
    }
    return 0.0;
}

OutageResult outage_probability(const Environment& env, Watts own_power, double threshold, OutageMethod method,
                                const EvalMethod& options) {
    if (!(threshold > 0.0)) throw DomainError("outage threshold must be positive");
    const SinrModel m = make_model(env, own_power);
    OutageResult r;
    switch (method) {
        case OutageMethod::exact:
            r.value = closed::cdf(m, threshold, options.contour);
            break;
        case OutageMethod::interference_limited:
            r.value = limited::cdf(m, threshold, options.contour);
            break;
        case OutageMethod::asymptotic:
            r.value = limited::outage_asymptote(m, threshold);
            if (m.phi > 0.01 * m.b * m.n) {
                r.regime_warning = true;
                r.note = "noise floor exceeds 1% of the mean interference power; the asymptote assumes an "
                         "interference-limited link";
            }
            break;
        case OutageMethod::monte_carlo: {
            EvalMethod mc = options;
            mc.kind = Method::monte_carlo;
            mc.validate();
            r.value = mc_cdf(env, own_power, threshold, mc);
            break;
        }
    }
    return r;
}

double achievable_rate(const Environment& env, Watts own_power, DuplexMode mode, const EvalMethod& method) {
    method.validate();
    const bool half = mode == DuplexMode::half;
    const double share = half ? 0.5 : 1.0;
    const SinrModel m = make_model(env, own_power, half);
    double efficiency = 0.0;
    switch (method.kind) {
        case Method::closed_form:
            efficiency = closed::rate(m, method.contour);
            break;
        case Method::interference_limited:
            efficiency = limited::rate(m, method.contour);
            break;
        case Method::quadrature_reference:
            efficiency = reference::rate(m);
            break;
        case Method::monte_carlo: {
            Environment e = env;
            if (half) e.si_cancellation = 0.0;
            efficiency = channel::sinr_expectation(e, own_power, mc_spec(method, false),
                                                   [](double g) { return std::log2(1.0 + g); });
            break;
        }
    }
    return share * env.bandwidth_hz * efficiency;
}

double conditional_bep(const ModulationScheme& modulation, double sinr) {
    return 0.5 * special::gamma_q(modulation.tau2, modulation.tau1 * sinr);
}

double bep(const Environment& env, Watts own_power, const ModulationScheme& modulation, const EvalMethod& method) {
    method.validate();
    modulation.validate();
    const SinrModel m = make_model(env, own_power);
    switch (method.kind) {
        case Method::closed_form:
            return closed::bep(m, modulation.tau1, modulation.tau2, method.contour);
        case Method::interference_limited:
            return limited::bep(m, modulation.tau1, modulation.tau2, method.contour);
        case Method::quadrature_reference:
            return reference::bep(m, modulation.tau1, modulation.tau2);
        case Method::monte_carlo:
            return channel::sinr_expectation(env, own_power, mc_spec(method, false),
                                             [&](double g) { return conditional_bep(modulation, g); });
    }
    return 0.0;
}

}  // namespace duplex::perf
