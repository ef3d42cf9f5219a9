#include "duplex/channel/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "duplex/error.hpp"
#include "duplex/special/gamma.hpp"

namespace duplex::channel {

namespace sf = duplex::special;

FadingParams::FadingParams(double alpha, double mu, double mean_power)
    : alpha_(alpha), mu_(mu), mean_power_(mean_power) {
    if (!(alpha > 0.0) || !(mu > 0.0) || !(mean_power > 0.0) || !std::isfinite(alpha) || !std::isfinite(mu) ||
        !std::isfinite(mean_power))
        throw ConfigError("fading: alpha, mu and mean power must be positive and finite");
    scale_ = mean_power * std::exp(sf::log_gamma(mu) - sf::log_gamma(mu + 2.0 / alpha));
}

double FadingParams::cdf(double y) const {
    if (y <= 0.0) return 0.0;
    return sf::gamma_p(mu_, std::pow(y / scale_, 0.5 * alpha_));
}

double FadingParams::pdf(double y) const {
    if (y <= 0.0) return 0.0;
    const double t = std::pow(y / scale_, 0.5 * alpha_);
    return std::exp(std::log(0.5 * alpha_) + mu_ * std::log(t) - t - sf::log_gamma(mu_) - std::log(y));
}

void Environment::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("environment: ") + what + " must be positive");
    };
    positive(qos_value, "qos value");
    if (!(power_cost >= 0.0) || !std::isfinite(power_cost))
        throw ConfigError("environment: power cost must be non-negative");
    positive(distance_m, "distance");
    positive(path_loss_exponent, "path-loss exponent");
    positive(noise_variance, "noise variance");
    positive(si_variance, "self-interference variance");
    positive(interferer_power.value, "interferer power");
    positive(interference_scale, "interference scale");
    positive(peer_power.value, "peer power");
    positive(bandwidth_hz, "bandwidth");
    if (!(si_cancellation >= 0.0 && si_cancellation <= 1.0))
        throw ConfigError("environment: cancellation factor must lie in [0, 1]");
    if (interferer_count < 1) throw ConfigError("environment: need at least one interfering path");
}

void ModulationScheme::validate() const {
    if (!(tau1 > 0.0) || !(tau2 > 0.0)) throw ConfigError("modulation: tau1 and tau2 must be positive");
}

const std::vector<ModulationScheme>& modulation_table() {
    static const std::vector<ModulationScheme> table = {
        {"BPSK", 1.0, 0.5},
        {"coherent-BFSK", 0.5, 0.5},
        {"noncoherent-BFSK", 0.5, 1.0},
        {"DPSK", 1.0, 1.0},
    };
    return table;
}

const ModulationScheme& modulation(const std::string& name) {
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        return s;
    };
    for (const auto& m : modulation_table())
        if (lower(m.name) == lower(name)) return m;
    throw ConfigError("unknown modulation scheme '" + name + "'");
}

double noise_floor(const Environment& env, Watts own_power) {
    return env.si_cancellation * own_power.value * env.si_variance + env.noise_variance;
}

LinkScales link_scales(const Environment& env, Watts own_power) {
    env.validate();
    if (!(own_power.value >= 0.0)) throw ConfigError("own power must be non-negative");
    LinkScales s;
    s.signal = env.peer_power.value * std::pow(env.distance_m, -env.path_loss_exponent) * env.fading.scale();
    s.interference = env.interference_scale * env.interferer_power.value;
    s.floor = noise_floor(env, own_power);
    return s;
}

double sinr(const Environment& env, Watts own_power, const ChannelSample& sample, bool interference_limited) {
    if (sample.h2 < 0.0 || sample.u < 0.0 || sample.phi < 0.0) throw DomainError("sinr: negative channel sample");
    const double expected = noise_floor(env, own_power);
    if (std::abs(sample.phi - expected) > 1e-12 * expected)
        throw ConfigError("sinr: sample noise floor does not match the environment");
    const double signal = env.peer_power.value * std::pow(env.distance_m, -env.path_loss_exponent) * sample.h2;
    const double denom = env.interferer_power.value * sample.u + (interference_limited ? 0.0 : sample.phi);
    if (!(denom > 0.0)) throw DomainError("sinr: zero interference in interference-limited mode");
    return signal / denom;
}

}  // namespace duplex::channel
