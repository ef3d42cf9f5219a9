#include "duplex/perf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "duplex/error.hpp"
#include "duplex/special/gamma.hpp"

namespace duplex::perf {

namespace sf = duplex::special;

namespace {

double lg(double x) { return sf::log_gamma(x); }

double signed_exp(const sf::FoxHResult& h, double log_prefactor) {
    return h.sign * std::exp(log_prefactor + h.log_abs);
}

// Clamps roundoff excursions; also maps -0 to +0.
double unit_clamp(double v, double hi) { return std::max(0.0, std::min(v, hi)); }

// Below this the integrand mass, and so the value, is not representable.
constexpr double kNegligible = 1e-300;

sf::ContourConfig relative_config(const sf::ContourConfig& c, double log_prefactor) {
    sf::ContourConfig out = c;
    out.abs_tol = std::min(std::exp(std::log(kNegligible) - log_prefactor), std::numeric_limits<double>::max());
    return out;
}

// Engine failures carry the bare H estimate; rescale it to the term.
template <class Eval>
sf::FoxHResult scaled(Eval&& eval, double log_prefactor) {
    try {
        return eval();
    } catch (const AccuracyError& e) {
        throw AccuracyError(e.what(), e.estimate() * std::exp(log_prefactor), e.achieved_rel_error());
    }
}

// Densities and rates must hold the accuracy target relative to their value.
double relative(const sf::FoxHResult& h, double log_prefactor, const sf::ContourConfig& c) {
    if (h.detail.log_l1 + log_prefactor < std::log(kNegligible)) return 0.0;
    const double v = signed_exp(h, log_prefactor);
    if (h.detail.rel_error > c.accuracy_target)
        throw AccuracyError("Fox H term is cancellation-limited at this argument", v, h.detail.rel_error);
    return v;
}

// Probabilities assembled as 1 - H or 1/2 - H need it only in absolute terms.
sf::ContourConfig absolute_config(const sf::ContourConfig& c, double log_prefactor) {
    sf::ContourConfig out = c;
    out.abs_tol = std::min(1e-3 * c.accuracy_target * std::exp(-log_prefactor), std::numeric_limits<double>::max());
    return out;
}

double absolute(const sf::FoxHResult& h, double log_prefactor, const sf::ContourConfig& c) {
    const double v = signed_exp(h, log_prefactor);
    const double err = h.detail.rel_error * std::abs(v);
    if (err > c.accuracy_target) throw AccuracyError("Fox H term misses the absolute accuracy target", v, err);
    return v;
}

void check_model(const SinrModel& m, bool need_floor) {
    if (!(m.a > 0.0) || !(m.b > 0.0) || !(m.alpha > 0.0) || !(m.mu > 0.0) || !(m.n >= 1.0))
        throw ConfigError("SINR model: scales and fading parameters must be positive");
    if (need_floor ? !(m.phi > 0.0) : !(m.phi >= 0.0)) throw ConfigError("SINR model: noise floor must be positive");
}

void check_x(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("SINR argument must be positive and finite");
}

// Univariate group shared by every full-model kernel: Γ(t2) Γ(N - t2)
// together with the joint Γ(α t1/2 - t2).
void fill_common(sf::FoxH2Params& p, const SinrModel& m) {
    p.joint_n = 1;
    p.joint_upper = {{1.0, 0.5 * m.alpha, -1.0}};
    p.second.m = 1;
    p.second.n = 1;
    p.second.upper = {{1.0, 1.0}};
    p.second.lower = {{m.n, 1.0}};
}

double log_z2(const SinrModel& m) { return std::log(m.phi) - std::log(m.b); }

}  // namespace

SinrModel make_model(const channel::Environment& env, Watts own_power, bool half_duplex) {
    const channel::LinkScales s = channel::link_scales(env, own_power);
    SinrModel m;
    m.a = s.signal;
    m.b = s.interference;
    m.phi = half_duplex ? env.noise_variance : s.floor;
    m.alpha = env.fading.alpha();
    m.mu = env.fading.mu();
    m.n = static_cast<double>(env.interferer_count);
    return m;
}

sf::FoxH2Params pdf_params(const SinrModel& m) {
    sf::FoxH2Params p;
    fill_common(p, m);
    p.first.m = 0;
    p.first.n = 1;
    p.first.upper = {{1.0 - m.mu, 1.0}};
    p.first.lower = {{1.0, 0.5 * m.alpha}};
    return p;
}

sf::FoxH2Params ccdf_params(const SinrModel& m) {
    sf::FoxH2Params p = pdf_params(m);
    p.first.lower = {{0.0, 0.5 * m.alpha}};
    return p;
}

sf::FoxH2Params rate_params(const SinrModel& m) {
    const double h = 0.5 * m.alpha;
    sf::FoxH2Params p;
    fill_common(p, m);
    p.first.m = 1;
    p.first.n = 3;
    p.first.upper = {{1.0 - m.mu, 1.0}, {1.0, h}, {1.0, h}};
    p.first.lower = {{1.0, h}, {0.0, h}, {1.0, h}};
    return p;
}

sf::FoxH2Params bep_params(const SinrModel& m, double tau2) {
    const double h = 0.5 * m.alpha;
    sf::FoxH2Params p;
    fill_common(p, m);
    p.first.m = 1;
    p.first.n = 1;
    p.first.upper = {{1.0 - m.mu, 1.0}};
    p.first.lower = {{tau2, h}, {0.0, h}};
    return p;
}

sf::FoxH1Params il_pdf_params(const SinrModel& m) {
    const double h = 0.5 * m.alpha;
    sf::FoxH1Params p;
    p.m = 1;
    p.n = 1;
    p.upper = {{1.0, 1.0}};
    p.lower = {{h * m.mu + m.n, h}};
    return p;
}

sf::FoxH1Params il_cdf_params(const SinrModel& m) {
    const double h = 0.5 * m.alpha;
    sf::FoxH1Params p;
    p.m = 2;
    p.n = 1;
    p.upper = {{1.0, 1.0}, {h * m.mu + 1.0, h}};
    p.lower = {{h * m.mu + m.n, h}, {h * m.mu, h}};
    return p;
}

sf::FoxH1Params il_rate_params(const SinrModel& m) {
    const double h = 0.5 * m.alpha;
    sf::FoxH1Params p;
    p.m = 2;
    p.n = 3;
    p.upper = {{1.0, 1.0}, {1.0 + h * m.mu, h}, {1.0 + h * m.mu, h}};
    p.lower = {{1.0 + h * m.mu, h}, {h * m.mu + m.n, h}, {h * m.mu, h}};
    return p;
}

sf::FoxH1Params il_bep_params(const SinrModel& m, double tau2) {
    const double h = 0.5 * m.alpha;
    sf::FoxH1Params p;
    p.m = 3;
    p.n = 1;
    p.upper = {{1.0, 1.0}, {m.mu + 1.0, 1.0}};
    p.lower = {{h * m.mu + m.n, h}, {tau2 + h * m.mu, h}, {m.mu, 1.0}};
    return p;
}

namespace closed {

double pdf(const SinrModel& m, double x, const sf::ContourConfig& c) {
    check_model(m, true);
    check_x(x);
    const double lz1 = 0.5 * m.alpha * (std::log(m.a) - std::log(m.phi) - std::log(x));
    const double log_pref = std::log(0.5 * m.alpha) - std::log(x) - lg(m.mu) - lg(m.n);
    const auto h =
        scaled([&] { return sf::fox_h2_log(pdf_params(m), lz1, log_z2(m), relative_config(c, log_pref)); }, log_pref);
    return std::max(0.0, relative(h, log_pref, c));
}

double ccdf(const SinrModel& m, double x, const sf::ContourConfig& c) {
    check_model(m, true);
    check_x(x);
    const double lz1 = 0.5 * m.alpha * (std::log(m.a) - std::log(m.phi) - std::log(x));
    const double log_pref = std::log(0.5 * m.alpha) - lg(m.mu) - lg(m.n);
    const auto h =
        scaled([&] { return sf::fox_h2_log(ccdf_params(m), lz1, log_z2(m), absolute_config(c, log_pref)); }, log_pref);
    return unit_clamp(absolute(h, log_pref, c), 1.0);
}

double cdf(const SinrModel& m, double x, const sf::ContourConfig& c) {
    return unit_clamp(1.0 - ccdf(m, x, c), 1.0);
}

double rate(const SinrModel& m, const sf::ContourConfig& c) {
    check_model(m, true);
    const double lz1 = 0.5 * m.alpha * (std::log(m.a) - std::log(m.phi));
    const double log_pref = std::log(0.5 * m.alpha) - std::log(std::numbers::ln2) - lg(m.mu) - lg(m.n);
    const auto h =
        scaled([&] { return sf::fox_h2_log(rate_params(m), lz1, log_z2(m), relative_config(c, log_pref)); }, log_pref);
    return std::max(0.0, relative(h, log_pref, c));
}

double bep(const SinrModel& m, double tau1, double tau2, const sf::ContourConfig& c) {
    check_model(m, true);
    const double lz1 = 0.5 * m.alpha * (std::log(tau1) + std::log(m.a) - std::log(m.phi));
    const double log_pref = std::log(0.25 * m.alpha) - lg(tau2) - lg(m.mu) - lg(m.n);
    const auto h = scaled(
        [&] { return sf::fox_h2_log(bep_params(m, tau2), lz1, log_z2(m), absolute_config(c, log_pref)); }, log_pref);
    return unit_clamp(0.5 - absolute(h, log_pref, c), 0.5);
}

}  // namespace closed

namespace limited {

double pdf(const SinrModel& m, double x, const sf::ContourConfig& c) {
    check_model(m, false);
    check_x(x);
    const double k = 0.5 * m.alpha * m.mu;
    const double lz = 0.5 * m.alpha * (std::log(m.a) - std::log(m.b) - std::log(x));
    const double log_pref = std::log(0.5 * m.alpha) + (k - 1.0) * std::log(x) + k * (std::log(m.b) - std::log(m.a)) -
                            lg(m.n) - lg(m.mu);
    const auto h = scaled([&] { return sf::fox_h1_log(il_pdf_params(m), lz, relative_config(c, log_pref)); }, log_pref);
    return std::max(0.0, relative(h, log_pref, c));
}

double cdf(const SinrModel& m, double x, const sf::ContourConfig& c) {
    check_model(m, false);
    check_x(x);
    const double k = 0.5 * m.alpha * m.mu;
    const double lz = 0.5 * m.alpha * (std::log(m.a) - std::log(m.b) - std::log(x));
    const double log_pref = std::log(0.5 * m.alpha) + k * (std::log(m.b) + std::log(x) - std::log(m.a)) -
                            lg(m.mu) - lg(m.n);
    const auto h = scaled([&] { return sf::fox_h1_log(il_cdf_params(m), lz, absolute_config(c, log_pref)); }, log_pref);
    return unit_clamp(absolute(h, log_pref, c), 1.0);
}

double rate(const SinrModel& m, const sf::ContourConfig& c) {
    check_model(m, false);
    const double k = 0.5 * m.alpha * m.mu;
    const double lz = 0.5 * m.alpha * (std::log(m.a) - std::log(m.b));
    const double log_pref = std::log(0.5 * m.alpha) + k * (std::log(m.b) - std::log(m.a)) -
                            std::log(std::numbers::ln2) - lg(m.n) - lg(m.mu);
    const auto h =
        scaled([&] { return sf::fox_h1_log(il_rate_params(m), lz, relative_config(c, log_pref)); }, log_pref);
    return std::max(0.0, relative(h, log_pref, c));
}

double bep(const SinrModel& m, double tau1, double tau2, const sf::ContourConfig& c) {
    check_model(m, false);
    const double k = 0.5 * m.alpha * m.mu;
    const double lz = 0.5 * m.alpha * (std::log(tau1) + std::log(m.a) - std::log(m.b));
    const double log_pref =
        k * (std::log(m.b) - std::log(tau1) - std::log(m.a)) - std::log(2.0) - lg(tau2) - lg(m.mu) - lg(m.n);
    const auto h =
        scaled([&] { return sf::fox_h1_log(il_bep_params(m, tau2), lz, absolute_config(c, log_pref)); }, log_pref);
    return unit_clamp(absolute(h, log_pref, c), 0.5);
}

double outage_asymptote(const SinrModel& m, double threshold) {
    check_model(m, false);
    if (!(threshold > 0.0)) throw DomainError("outage threshold must be positive");
    const double k = 0.5 * m.alpha * m.mu;
    return std::exp(k * (std::log(threshold) + std::log(m.b) - std::log(m.a)) + lg(k + m.n) - std::log(m.mu) -
                    lg(m.n) - lg(m.mu));
}

}  // namespace limited

namespace reference {
namespace {

constexpr double kTol = 1e-13;

// Integral over the interference gain g ~ Gamma(N, 1) of h(v), v = φ + b g.
template <class F>
double over_interference(const SinrModel& m, F&& h) {
    const double log_norm = lg(m.n);
    auto integrand = [&](double g) {
        if (g <= 0.0) return 0.0;
        const double w = std::exp((m.n - 1.0) * std::log(g) - g - log_norm);
        return w == 0.0 ? 0.0 : w * h(m.phi + m.b * g);
    };
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate(integrand, kTol);
}

// Typical SINR magnitude, used to rescale the outer integrals.
double sinr_scale(const SinrModel& m) {
    return m.a * std::exp(lg(m.mu + 2.0 / m.alpha) - lg(m.mu)) / (m.phi + m.b * m.n);
}

}  // namespace

double pdf(const SinrModel& m, double x) {
    check_model(m, false);
    check_x(x);
    const double h = 0.5 * m.alpha;
    // f(x) = E_g[ v f_W(x v) ],  f_W(w) = (α/2) t^μ e^{-t} / (Γ(μ) w),  t = (w/a)^{α/2}
    return over_interference(m, [&](double v) {
        const double w = x * v;
        const double lt = h * (std::log(w) - std::log(m.a));
        const double t = std::exp(lt);
        return std::exp(std::log(h) + m.mu * lt - t - lg(m.mu) - std::log(x));
    });
}

double cdf(const SinrModel& m, double x) {
    check_model(m, false);
    check_x(x);
    return over_interference(m, [&](double v) { return sf::gamma_p(m.mu, std::pow(x * v / m.a, 0.5 * m.alpha)); });
}

double ccdf(const SinrModel& m, double x) {
    check_model(m, false);
    check_x(x);
    return over_interference(m, [&](double v) { return sf::gamma_q(m.mu, std::pow(x * v / m.a, 0.5 * m.alpha)); });
}

double rate(const SinrModel& m) {
    const double s = sinr_scale(m);
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate(
        [&](double u) {
            if (u <= 0.0) return 0.0;
            const double x = s * u;
            return std::log2(1.0 + x) * pdf(m, x) * s;
        },
        1e-11);
}

double bep(const SinrModel& m, double tau1, double tau2) {
    const double s = sinr_scale(m);
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate(
        [&](double u) {
            if (u <= 0.0) return 0.0;
            const double x = s * u;
            return 0.5 * sf::gamma_q(tau2, tau1 * x) * pdf(m, x) * s;
        },
        1e-11);
}

}  // namespace reference

}  // namespace duplex::perf
