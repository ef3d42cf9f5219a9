#include "duplex/channel/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "duplex/error.hpp"
#include "duplex/parallel.hpp"

namespace duplex::channel {

double sample_fading_power(const FadingParams& params, RandomStream& rng) {
    return params.scale() * std::pow(rng.gamma(params.mu()), 2.0 / params.alpha());
}

double sample_interference_aggregate(int count, double scale, RandomStream& rng) {
    if (count < 1) throw DomainError("interference: need at least one path");
    if (!(scale > 0.0)) throw DomainError("interference: scale must be positive");
    return scale * rng.gamma(static_cast<double>(count));
}

ChannelSample sample_channel(const Environment& env, Watts own_power, RandomStream& rng) {
    ChannelSample s;
    s.h2 = sample_fading_power(env.fading, rng);
    s.u = sample_interference_aggregate(env.interferer_count, env.interference_scale, rng);
    s.phi = noise_floor(env, own_power);
    return s;
}

std::vector<double> sample_sinr(const Environment& env, Watts own_power, const MonteCarloSpec& spec) {
    env.validate();
    if (spec.samples == 0 || spec.streams == 0) throw ConfigError("Monte Carlo: need samples and streams");
    std::vector<double> out(spec.samples);
    const std::size_t streams = std::min(spec.streams, spec.samples);
    const std::size_t base = spec.samples / streams;
    const std::size_t extra = spec.samples % streams;
    // Precomputed constants; the per-draw work is two gamma variates.
    const double signal_scale = env.peer_power.value * std::pow(env.distance_m, -env.path_loss_exponent);
    const double phi = spec.interference_limited ? 0.0 : noise_floor(env, own_power);
    const double p_i = env.interferer_power.value;
    parallel_for(streams, [&](std::size_t s) {
        RandomStream rng(spec.seed, s);
        const std::size_t begin = s * base + std::min(s, extra);
        const std::size_t count = base + (s < extra ? 1 : 0);
        for (std::size_t i = begin; i < begin + count; ++i) {
            const double h2 = sample_fading_power(env.fading, rng);
            const double u = sample_interference_aggregate(env.interferer_count, env.interference_scale, rng);
            const double denom = p_i * u + phi;
            out[i] = denom > 0.0 ? signal_scale * h2 / denom : std::numeric_limits<double>::infinity();
        }
    });
    return out;
}

double empirical_cdf_at(const std::vector<double>& sorted, double x) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

std::vector<double> sinr_empirical_cdf(const Environment& env, Watts own_power, const MonteCarloSpec& spec,
                                       const std::vector<double>& grid) {
    if (spec.samples < 10000) throw ConfigError("empirical CDF: need at least 10^4 samples");
    std::vector<double> g = sample_sinr(env, own_power, spec);
    std::sort(g.begin(), g.end());
    std::vector<double> out;
    out.reserve(grid.size());
    for (double x : grid) out.push_back(empirical_cdf_at(g, x));
    return out;
}

}  // namespace duplex::channel
